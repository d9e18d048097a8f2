"""Classical Fisher information of a measurement, comparison against the
quantum Fisher information, and Monte Carlo evidence.

Outcomes with positive probability contribute the usual score terms
``(d_l p)(d_m p) / p``. Structurally null outcomes (zero probability and
zero first derivative, as every null element of a fixed-rank family has)
still carry information: their probability grows quadratically away from
the point, and when that quadratic form has rank one the outcome's Fisher
contribution has a direction-independent limit equal to twice the Hessian,

    lim F_lm = Re tr(Lpz_l^dag diag(q) Lpz_m E_00),

which is computable from first-order data alone. Measurements built from
the saturation certificates have exactly rank-one null curvature, and this
term is what closes the gap to the quantum Fisher information. Null
outcomes whose curvature is not rank one have no direction-independent
limit; they are flagged and contribute nothing (which can only
underestimate the information, keeping the quantum bound valid).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import numkernel as nk
from .errors import QcrbSatError
from .model import SupportDecomposition
from .povm import POVM

PROB_TOL = 1e-12


class SingularOutcomeError(QcrbSatError):
    pass


class ModelMismatchError(QcrbSatError):
    pass


@dataclass
class NullOutcomeInfo:
    index: int
    info: np.ndarray  # (p, p) limiting Fisher contribution (4x curvature form)
    rank1: bool


@dataclass
class MeasurementDistribution:
    """Outcome probabilities, their parameter derivatives, and null data."""

    probs: np.ndarray  # (M,)
    dprobs: np.ndarray  # (p, M)
    support_mask: np.ndarray  # probs > prob_tol
    singular: list  # outcomes with p ~ 0 but dp != 0 (information undefined)
    null_info: list  # NullOutcomeInfo for structurally null outcomes
    prob_tol: float
    deriv_tol: float

    @property
    def n_params(self) -> int:
        return self.dprobs.shape[0]


def outcome_distribution(
    rho: np.ndarray,
    drho: np.ndarray,
    povm: POVM,
    dec: Optional[SupportDecomposition] = None,
    prob_tol: float = PROB_TOL,
    deriv_tol: Optional[float] = None,
    rank1_tol: float = 1e-8,
) -> MeasurementDistribution:
    """Probabilities p_k = tr(rho E_k) and derivatives tr(drho_l E_k).

    With a support decomposition available, the limiting information of
    structurally null outcomes is computed as well (see module docstring).
    """
    p = len(drho)
    m = povm.n_outcomes
    probs = np.array([float(np.trace(rho @ e).real) for e in povm.elements])
    dprobs = np.array(
        [[float(np.trace(d @ e).real) for e in povm.elements] for d in drho]
    )
    if np.any(probs < -1e-12):
        raise QcrbSatError(f"negative outcome probability {probs.min():.3e}")
    probs[(probs < 0.0) & (probs > -1e-12)] = 0.0
    if abs(probs.sum() - 1.0) > 1e-10:
        raise QcrbSatError(f"probabilities sum to {probs.sum()!r}")
    dp_sums = np.abs(dprobs.sum(axis=1))
    dp_scale = max(1.0, float(np.abs(dprobs).max(initial=0.0)))
    if np.any(dp_sums > 1e-10 * dp_scale):
        raise QcrbSatError(
            f"probability derivatives do not sum to zero: {dp_sums.tolist()}"
        )

    if deriv_tol is None:
        deriv_tol = 1e-8 * max(1.0, max(nk.fro(d) for d in drho))

    support_mask = probs > prob_tol
    singular = [
        int(k)
        for k in range(m)
        if not support_mask[k] and np.max(np.abs(dprobs[:, k])) > deriv_tol
    ]

    null_info = []
    if dec is not None:
        lpz = [2.0 * (dec.V.conj().T @ d @ dec.Y) / dec.q[:, None] for d in drho]
        q_lpz = [dec.q[:, None] * L for L in lpz]
        for k in range(m):
            if support_mask[k] or k in singular:
                continue
            e00 = dec.Y.conj().T @ povm.elements[k] @ dec.Y
            info = np.zeros((p, p))
            for l in range(p):
                for mm in range(l, p):
                    val = float(np.trace(lpz[l].conj().T @ q_lpz[mm] @ e00).real)
                    info[l, mm] = info[mm, l] = val
            w = np.linalg.eigvalsh(info)
            top = max(w[-1], 0.0)
            rank1 = bool(w[-2] <= max(1e-12, rank1_tol * top)) if p > 1 else True
            null_info.append(NullOutcomeInfo(index=k, info=info, rank1=rank1))

    return MeasurementDistribution(
        probs=probs,
        dprobs=dprobs,
        support_mask=support_mask,
        singular=singular,
        null_info=null_info,
        prob_tol=prob_tol,
        deriv_tol=deriv_tol,
    )


def classical_fim(dist: MeasurementDistribution) -> np.ndarray:
    """Classical Fisher information matrix of the outcome distribution.

    Sums score terms over outcomes with positive probability plus the
    limiting contributions of rank-one null outcomes. Refuses distributions
    with singular outcomes (zero probability, nonzero derivative), where the
    information is genuinely undefined.
    """
    if dist.singular:
        raise SingularOutcomeError(
            f"outcome(s) {dist.singular} have zero probability but nonzero "
            "probability derivative; the classical Fisher information is undefined",
            outcomes=dist.singular,
        )
    p = dist.n_params
    f = np.zeros((p, p))
    for k in np.nonzero(dist.support_mask)[0]:
        s = dist.dprobs[:, k]
        f += np.outer(s, s) / dist.probs[k]
    for rec in dist.null_info:
        if rec.rank1:
            f += rec.info
    return (f + f.T) / 2.0


@dataclass
class FisherComparison:
    F_c: np.ndarray
    F_Q: np.ndarray
    gap: float  # operator norm of F_Q - F_c
    psd_violation: float  # how far F_Q - F_c dips below zero
    saturated: bool
    tol: float
    cost_classical: Optional[float] = None
    cost_quantum: Optional[float] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "F_c": self.F_c.tolist(),
            "F_Q": self.F_Q.tolist(),
            "gap_opnorm": self.gap,
            "psd_violation": self.psd_violation,
            "saturated": self.saturated,
            "tol": self.tol,
            "cost_classical": self.cost_classical,
            "cost_quantum": self.cost_quantum,
            "notes": list(self.notes),
        }


def compare(
    f_c: np.ndarray,
    f_q: np.ndarray,
    g: Optional[np.ndarray] = None,
    tol: float = 1e-8,
) -> FisherComparison:
    """Compare classical against quantum information.

    ``saturated`` means the operator-norm gap is below ``tol`` relative to
    the quantum matrix. Scalar costs tr(G F^-1) are reported for a supplied
    cost matrix when the respective information matrix is invertible,
    otherwise omitted with a note.
    """
    f_c = np.asarray(f_c, dtype=float)
    f_q = np.asarray(f_q, dtype=float)
    for name, m in (("classical", f_c), ("quantum", f_q)):
        if m.shape != f_c.shape or np.linalg.norm(m - m.T) > 1e-8 * max(1.0, np.linalg.norm(m)):
            raise QcrbSatError(f"{name} information matrix is not symmetric")
    diff = f_q - f_c
    gap = nk.opnorm(diff)
    scale = nk.opnorm(f_q)
    saturated = gap <= tol * scale if scale > 0 else gap <= tol
    wmin = float(np.linalg.eigvalsh((diff + diff.T) / 2.0)[0])
    psd_violation = max(0.0, -wmin)

    notes = []
    cost_c = cost_q = None
    if g is not None:
        g = np.asarray(g, dtype=float)

        def inv_cost(m, name):
            w = np.linalg.eigvalsh(m)
            if w[0] <= 1e-12 * max(1.0, w[-1]):
                notes.append(f"{name} information matrix is singular; scalar cost omitted")
                return None
            return float(np.trace(g @ np.linalg.inv(m)))

        cost_q = inv_cost(f_q, "quantum")
        cost_c = inv_cost(f_c, "classical") if cost_q is not None else None

    return FisherComparison(
        F_c=f_c,
        F_Q=f_q,
        gap=gap,
        psd_violation=psd_violation,
        saturated=bool(saturated),
        tol=tol,
        cost_classical=cost_c,
        cost_quantum=cost_q,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# Sampling and the empirical information estimate.
# ---------------------------------------------------------------------------


def sample_outcomes(dist: MeasurementDistribution, n: int, seed: int) -> np.ndarray:
    """Draw n outcomes; deterministic for a fixed seed."""
    if n < 1:
        raise QcrbSatError(f"need at least one trial, got {n}")
    p = np.clip(dist.probs, 0.0, None)
    p = p / p.sum()
    rng = np.random.default_rng(seed)
    return rng.multinomial(n, p)


def empirical_fim(counts: np.ndarray, dist: MeasurementDistribution):
    """Plug-in Fisher estimate from observed counts, with standard errors.

    Scores use the analytic probability derivatives; sampled outcomes enter
    through their empirical frequencies while the deterministic null-outcome
    contribution is added exactly (those outcomes are never observed).
    Observing an outcome the model says has zero probability is a model
    mismatch and raises.
    """
    counts = np.asarray(counts)
    if counts.shape != dist.probs.shape:
        raise QcrbSatError(f"counts shape {counts.shape} does not match {dist.probs.shape}")
    n = int(counts.sum())
    bad = [int(k) for k in np.nonzero((counts > 0) & ~dist.support_mask)[0]]
    if bad:
        raise ModelMismatchError(
            f"outcome(s) {bad} observed but the model assigns them zero probability",
            outcomes=bad,
        )

    p = dist.n_params
    null_part = np.zeros((p, p))
    for rec in dist.null_info:
        if rec.rank1:
            null_part += rec.info

    support = np.nonzero(dist.support_mask)[0]
    scores = np.zeros((p, len(support)))
    for i, k in enumerate(support):
        scores[:, i] = dist.dprobs[:, k] / dist.probs[k]
    freqs = counts[support] / n

    f_hat = null_part.copy()
    stderr = np.zeros((p, p))
    for l in range(p):
        for m in range(l, p):
            g = scores[l] * scores[m]
            mean = float(np.dot(freqs, g))
            var = float(np.dot(freqs, (g - mean) ** 2))
            f_hat[l, m] = f_hat[m, l] = f_hat[l, m] + mean
            stderr[l, m] = stderr[m, l] = np.sqrt(var / n)
    return f_hat, stderr


@dataclass
class MonteCarloRecord:
    seed: int
    trials: int
    counts: np.ndarray
    fim_estimate: np.ndarray
    fim_stderr: np.ndarray
    estimator: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "trials": self.trials,
            "counts": self.counts.tolist(),
            "fim_estimate": self.fim_estimate.tolist(),
            "fim_stderr": self.fim_stderr.tolist(),
            "estimator": self.estimator,
        }


def simulate(dist: MeasurementDistribution, trials: int, seed: int) -> MonteCarloRecord:
    counts = sample_outcomes(dist, trials, seed)
    f_hat, stderr = empirical_fim(counts, dist)
    return MonteCarloRecord(
        seed=seed, trials=trials, counts=counts, fim_estimate=f_hat, fim_stderr=stderr
    )


# ---------------------------------------------------------------------------
# Optional estimator study: batched maximum likelihood.
# ---------------------------------------------------------------------------


def _golden_section(f: Callable[[float], float], lo: float, hi: float, iters: int = 40):
    phi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - phi * (b - a), a + phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi * (b - a)
            fd = f(d)
    return (a + b) / 2.0


def max_likelihood_estimate(
    prob_fn: Callable[[np.ndarray], np.ndarray],
    counts: np.ndarray,
    theta0: np.ndarray,
    radius: float = 0.05,
    sweeps: int = 4,
) -> np.ndarray:
    """Local maximum-likelihood fit by coordinate golden-section search."""
    counts = np.asarray(counts, dtype=float)

    def nll(theta):
        p = np.clip(np.asarray(prob_fn(theta), dtype=float), 1e-300, None)
        return -float(np.dot(counts, np.log(p)))

    theta = np.asarray(theta0, dtype=float).copy()
    for _ in range(sweeps):
        for i in range(len(theta)):

            def f1(x, i=i):
                t = theta.copy()
                t[i] = x
                return nll(t)

            theta[i] = _golden_section(f1, theta[i] - radius, theta[i] + radius)
    return theta


def estimator_study(
    prob_fn: Callable[[np.ndarray], np.ndarray],
    dist: MeasurementDistribution,
    theta0: np.ndarray,
    batches: int,
    batch_size: int,
    seed: int,
    radius: float = 0.05,
) -> dict:
    """Covariance of batched maximum-likelihood estimates around theta0."""
    estimates = []
    for b in range(batches):
        counts = sample_outcomes(dist, batch_size, seed + b)
        estimates.append(max_likelihood_estimate(prob_fn, counts, theta0, radius=radius))
    est = np.array(estimates)
    return {
        "batches": batches,
        "batch_size": batch_size,
        "estimates": est.tolist(),
        "estimates_mean": est.mean(axis=0).tolist(),
        "covariance": np.cov(est.T, bias=False).reshape(len(theta0), len(theta0)).tolist(),
    }
