"""Command-line front end.

Subcommands: ``analyze`` (support split, SLDs, quantum information,
condition checks, verdict), ``construct-povm`` (the optimal projective
measurement plus its structural certificate), ``fisher`` (classical vs
quantum information for a constructed or supplied measurement),
``simulate`` (seeded Monte Carlo with an empirical information estimate),
and ``sweep`` (analyze over a parameter grid). All output is JSON with
complex entries as [re, im] pairs; every tolerance, scheme, and seed that
influenced a number is part of the report, and rerunning with identical
inputs reproduces it bit for bit.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from . import fisher as fish
from . import fixtures
from . import povm as povm_mod
from .conditions import VERDICT_SATURABLE, evaluate_conditions
from .errors import QcrbSatError
from .model import (
    StateAtPoint,
    evaluate,
    parse_numeric_model,
    support_decomposition,
)
from .sld import compute_sld, qfim

SCHEMA_VERSION = 1


class NotCertifiedError(QcrbSatError):
    pass


def _cmat(m) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _jsonable_params(params):
    if not params:
        return {}
    out = {}
    for k, v in params.items():
        out[k] = [v.real, v.imag] if isinstance(v, complex) else v
    return out


def parse_params(text: str) -> dict:
    """Parse "k=v,k=v" into typed values (int, float, complex, or string)."""
    out = {}
    if not text:
        return out
    for chunk in text.split(","):
        if "=" not in chunk:
            raise QcrbSatError(f"malformed parameter {chunk!r}, expected k=v")
        key, raw = chunk.split("=", 1)
        for cast in (int, float, complex):
            try:
                out[key.strip()] = cast(raw)
                break
            except ValueError:
                continue
        else:
            out[key.strip()] = raw
    return out


def parse_theta(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise QcrbSatError(f"malformed theta {text!r}, expected comma-separated floats")


def parse_grid(text: str):
    """Per-axis "start:stop:count" specs, comma separated."""
    axes = []
    for chunk in text.split(","):
        parts = chunk.split(":")
        if len(parts) != 3:
            raise QcrbSatError(f"malformed grid axis {chunk!r}, expected start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise QcrbSatError(f"grid axis needs at least one point, got {count}")
        axes.append(np.linspace(start, stop, count))
    return axes


def _load_state(args):
    """Resolve the state source; returns (model_or_None, state_point, witness)."""
    if args.numeric_model:
        sp = parse_numeric_model(args.numeric_model)
        return None, sp, None
    if not args.model:
        raise QcrbSatError("either --model or --numeric-model is required")
    params = parse_params(args.params)
    model = fixtures.get(args.model, **params)
    witness = fixtures.get_witness(args.model, **params)
    if args.theta is None:
        raise QcrbSatError("--theta is required with --model")
    theta = parse_theta(args.theta)
    sp = evaluate(model, theta, scheme=args.scheme, h=args.fd_step)
    return model, sp, witness


def run_analysis(args, sp: StateAtPoint, model=None, witness=None):
    """The core pipeline: decomposition, SLDs, information, conditions."""
    rng = np.random.default_rng(args.seed)
    dec = support_decomposition(sp, rank_tol=args.rank_tol)
    sld_tol = args.cond_tol if args.cond_tol is not None else sp.deriv_tol
    slds = compute_sld(dec, sp.drho, sld_tol=sld_tol)
    f_q = qfim(dec, slds)
    report = evaluate_conditions(
        sp, dec, slds, model=model, witness=witness, tol=args.cond_tol, rng=rng
    )
    return dec, slds, f_q, report


def base_report(args, sp: StateAtPoint, model, dec, f_q, report) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "qcrbsat", "version": __version__},
        "inputs": {
            "model": model.name if model is not None else None,
            "params": _jsonable_params(model.params) if model is not None else None,
            "numeric_model": bool(args.numeric_model),
            "theta": None if sp.theta is None else [float(x) for x in sp.theta],
            "scheme": sp.scheme_label(),
            "rank_tol": args.rank_tol,
            "cond_tol": args.cond_tol if args.cond_tol is not None else sp.deriv_tol,
            "seed": args.seed,
        },
        "support": {
            "r_plus": dec.r_plus,
            "r_zero": dec.r_zero,
            "q": dec.q.tolist(),
        },
        "qfim": f_q.tolist(),
        "conditions": report.to_dict(),
        "verdict": report.verdict,
    }


def _emit(payload: dict, args) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _construct_from_report(dec, slds, report, seed):
    if report.verdict != VERDICT_SATURABLE:
        raise NotCertifiedError(
            "refusing to construct a measurement: the saturability verdict is "
            f"{report.verdict}, not {VERDICT_SATURABLE}",
            verdict=report.verdict,
            reasoning=report.reasoning,
        )
    rng = np.random.default_rng(seed)
    return povm_mod.construct_optimal(
        dec, slds, W=report.cond4.W, lambdas=report.cond4.lambdas, rng=rng
    )


def _resolve_povm(args, dec, slds, report):
    if getattr(args, "povm", None):
        p = povm_mod.povm_from_json(args.povm)
        povm_mod.require_valid(p)
        return p
    return _construct_from_report(dec, slds, report, args.seed)


def cmd_analyze(args) -> dict:
    model, sp, witness = _load_state(args)
    dec, slds, f_q, report = run_analysis(args, sp, model, witness)
    return base_report(args, sp, model, dec, f_q, report)


def cmd_construct_povm(args) -> dict:
    model, sp, witness = _load_state(args)
    dec, slds, f_q, report = run_analysis(args, sp, model, witness)
    povm = _construct_from_report(dec, slds, report, args.seed)
    cert = povm_mod.verify_saturation_structural(
        povm, dec, slds, tol=args.cond_tol if args.cond_tol is not None else sp.deriv_tol
    )
    out = base_report(args, sp, model, dec, f_q, report)
    out["povm"] = povm_mod.povm_to_json(povm)
    out["saturation_certificate"] = cert.to_dict()
    if args.povm_output:
        with open(args.povm_output, "w", encoding="utf-8") as fh:
            json.dump(povm_mod.povm_to_json(povm), fh, indent=2)
            fh.write("\n")
    return out


def cmd_fisher(args) -> dict:
    model, sp, witness = _load_state(args)
    dec, slds, f_q, report = run_analysis(args, sp, model, witness)
    povm = _resolve_povm(args, dec, slds, report)
    povm_mod.classify_elements(povm, sp.rho, dec)
    cert = povm_mod.verify_saturation_structural(
        povm, dec, slds, tol=args.cond_tol if args.cond_tol is not None else sp.deriv_tol
    )
    dist = fish.outcome_distribution(sp.rho, sp.drho, povm, dec)
    f_c = fish.classical_fim(dist)
    g = None
    if args.cost_matrix:
        with open(args.cost_matrix, "r", encoding="utf-8") as fh:
            g = np.array(json.load(fh), dtype=float)
    comparison = fish.compare(f_c, f_q, g=g, tol=args.cond_tol if args.cond_tol else sp.deriv_tol)
    out = base_report(args, sp, model, dec, f_q, report)
    out["povm"] = povm_mod.povm_to_json(povm)
    out["saturation_certificate"] = cert.to_dict()
    out["fisher"] = comparison.to_dict()
    return out


def cmd_simulate(args) -> dict:
    model, sp, witness = _load_state(args)
    dec, slds, f_q, report = run_analysis(args, sp, model, witness)
    povm = _resolve_povm(args, dec, slds, report)
    povm_mod.classify_elements(povm, sp.rho, dec)
    dist = fish.outcome_distribution(sp.rho, sp.drho, povm, dec)
    f_c = fish.classical_fim(dist)
    record = fish.simulate(dist, trials=args.trials, seed=args.seed)
    if args.estimator:
        if model is None:
            raise QcrbSatError("the estimator study needs a registry model")

        def prob_fn(theta):
            s = evaluate(model, theta, scheme=sp.scheme if sp.scheme != "richardson" else "central_fd", h=args.fd_step)
            return np.array([float(np.trace(s.rho @ e).real) for e in povm.elements])

        record.estimator = fish.estimator_study(
            prob_fn, dist, sp.theta, batches=args.batches,
            batch_size=max(1, args.trials // args.batches), seed=args.seed,
        )
    out = base_report(args, sp, model, dec, f_q, report)
    out["povm"] = povm_mod.povm_to_json(povm)
    out["fisher"] = fish.compare(f_c, f_q, tol=args.cond_tol if args.cond_tol else sp.deriv_tol).to_dict()
    out["monte_carlo"] = record.to_dict()
    return out


def cmd_sweep(args) -> dict:
    if not args.model:
        raise QcrbSatError("sweep requires --model (numeric models are single-point)")
    params = parse_params(args.params)
    model = fixtures.get(args.model, **params)
    witness = fixtures.get_witness(args.model, **params)
    axes = parse_grid(args.grid)
    if len(axes) != model.n_params:
        raise QcrbSatError(f"grid has {len(axes)} axes, model has {model.n_params} parameters")

    points = [np.array(t) for t in _cartesian(axes)]
    reports = []
    for theta in points:
        try:
            sp = evaluate(model, theta, scheme=args.scheme, h=args.fd_step)
            dec, slds, f_q, report = run_analysis(args, sp, model, witness)
            reports.append(base_report(args, sp, model, dec, f_q, report))
        except QcrbSatError as exc:
            reports.append({"theta": [float(x) for x in theta], "error": exc.to_dict()})
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "qcrbsat", "version": __version__},
        "sweep": reports,
        "grid": args.grid,
        "model": model.name,
    }


def _cartesian(axes):
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--model", help="registered model name")
    common.add_argument("--params", default="", help="model parameters, k=v,k=v")
    common.add_argument("--theta", help="parameter point, comma separated")
    common.add_argument("--numeric-model", help="single-point numeric model JSON file")
    common.add_argument("--scheme", default="auto",
                        choices=["auto", "analytic", "central_fd", "richardson"])
    common.add_argument("--fd-step", type=float, default=1e-5)
    common.add_argument("--rank-tol", type=float, default=1e-10)
    common.add_argument("--cond-tol", type=float, default=None,
                        help="condition tolerance (default: per derivative scheme)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--output", help="write the JSON report here instead of stdout")
    common.add_argument("--format", default="json", choices=["json"])

    parser = argparse.ArgumentParser(
        prog="qcrbsat",
        description="Decide, certify, and demonstrate single-copy saturability "
        "of the multiparameter quantum Cramér-Rao bound.",
    )
    parser.add_argument("--version", action="version", version=f"qcrbsat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("analyze", parents=[common], help="run the condition pipeline")
    pc = sub.add_parser("construct-povm", parents=[common],
                        help="build the optimal projective measurement")
    pc.add_argument("--povm-output", help="also write the measurement JSON here")
    pf = sub.add_parser("fisher", parents=[common],
                        help="classical vs quantum information for a measurement")
    pf.add_argument("--povm", help="measurement JSON file (default: construct)")
    pf.add_argument("--cost-matrix", help="JSON file with a positive-definite cost matrix")
    ps = sub.add_parser("simulate", parents=[common], help="seeded Monte Carlo sampling")
    ps.add_argument("--povm", help="measurement JSON file (default: construct)")
    ps.add_argument("--trials", type=int, default=1_000_000)
    ps.add_argument("--estimator", action="store_true", help="add a batched MLE study")
    ps.add_argument("--batches", type=int, default=20)
    pw = sub.add_parser("sweep", parents=[common], help="analyze over a parameter grid")
    pw.add_argument("--grid", required=True, help="per-axis start:stop:count, comma separated")
    return parser


_COMMANDS = {
    "analyze": cmd_analyze,
    "construct-povm": cmd_construct_povm,
    "fisher": cmd_fisher,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        payload = _COMMANDS[args.command](args)
    except QcrbSatError as exc:
        _emit({"schema_version": SCHEMA_VERSION, "error": exc.to_dict()}, args)
        return 1
    _emit(payload, args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
