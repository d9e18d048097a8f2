"""POVMs: validation, regular/null classification, the optimal projective
construction, and structural saturation certificates.

A measurement saturates the quantum bound exactly when every element
satisfies an eigenvalue-type identity on the support: regular elements
(positive probability) must satisfy ``E L_l P+ = c E P+`` with real
constants, and null elements (zero probability) must relate the SLDs
pairwise, ``E_00 (Lpz_l^dag - c Lpz_m^dag) = 0`` with real constants. The
certificate below fits those constants by least squares and treats any
imaginary residue as part of the failure residual.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import numkernel as nk
from .errors import QcrbSatError
from .model import SupportDecomposition
from .sld import SLDSet


class InvalidPOVMError(QcrbSatError):
    pass


class StructureViolationError(QcrbSatError):
    pass


class MissingAlignmentError(QcrbSatError):
    pass


@dataclass
class POVM:
    """A finite measurement: PSD elements summing to the identity."""

    elements: list
    outcome_labels: Optional[np.ndarray] = None
    classification: Optional[list] = None  # per element: "regular" | "null"
    projective: Optional[bool] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.elements = [np.asarray(e, dtype=complex) for e in self.elements]
        if not self.elements:
            raise InvalidPOVMError("a measurement needs at least one element")
        n = self.elements[0].shape[0]
        for k, e in enumerate(self.elements):
            if e.shape != (n, n):
                raise InvalidPOVMError(
                    f"element {k} has shape {e.shape}, expected ({n}, {n})", element=k
                )
        if self.outcome_labels is None:
            self.outcome_labels = np.arange(len(self.elements), dtype=float)
        else:
            self.outcome_labels = np.asarray(self.outcome_labels, dtype=float)

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]


def validate(povm: POVM, tol: float = 1e-10) -> dict:
    """Completeness, positivity and projectivity diagnostics.

    Returns a diagnostics dict and stamps ``povm.projective``; it never
    raises, so callers can report violations per element.
    """
    n = povm.dim
    total = sum(povm.elements)
    completeness = nk.fro(total - np.eye(n))
    min_eigs = []
    herm_defects = []
    for e in povm.elements:
        herm_defects.append(nk.herm_defect(e))
        min_eigs.append(float(np.linalg.eigvalsh(nk.hermitize(e))[0]))
    psd_ok = all(m >= -tol for m in min_eigs)
    complete = completeness <= tol * max(1.0, n)

    proj_res = 0.0
    for i, e in enumerate(povm.elements):
        proj_res = max(proj_res, nk.fro(e @ e - e))
        for j in range(i + 1, povm.n_outcomes):
            proj_res = max(proj_res, nk.fro(e @ povm.elements[j] - povm.elements[j] @ e))
    projective = proj_res <= tol * max(1.0, n)
    povm.projective = projective

    return {
        "complete": complete,
        "completeness_residual": completeness,
        "psd_ok": psd_ok,
        "min_eigenvalues": min_eigs,
        "herm_defects": herm_defects,
        "projective": projective,
        "projectivity_residual": proj_res,
        "valid": complete and psd_ok,
        "tol": tol,
    }


def require_valid(povm: POVM, tol: float = 1e-10) -> dict:
    diag = validate(povm, tol)
    if not diag["valid"]:
        raise InvalidPOVMError(
            "POVM violates completeness or positivity",
            completeness_residual=diag["completeness_residual"],
            min_eigenvalues=diag["min_eigenvalues"],
        )
    return diag


def classify_elements(
    povm: POVM,
    rho: np.ndarray,
    dec: SupportDecomposition,
    tol: float = 1e-12,
    structure_tol: float = 1e-8,
) -> list:
    """Label elements regular (positive probability) or null.

    Null elements must vanish on the ++ and +0 blocks (anything else is
    incompatible with positivity at zero probability); a violation raises
    :class:`StructureViolationError`.
    """
    labels = []
    for k, e in enumerate(povm.elements):
        prob = float(np.trace(rho @ e).real)
        if prob > tol:
            labels.append("regular")
            continue
        scale = max(1.0, nk.fro(e))
        epp = dec.V.conj().T @ e @ dec.V
        epz = dec.V.conj().T @ e @ dec.Y
        if nk.fro(epp) > structure_tol * scale or nk.fro(epz) > structure_tol * scale:
            raise StructureViolationError(
                f"element {k} has zero probability but support blocks "
                f"(++ {nk.fro(epp):.3e}, +0 {nk.fro(epz):.3e}); "
                "not a positive semidefinite null element",
                element=k,
                pp_residual=nk.fro(epp),
                pz_residual=nk.fro(epz),
            )
        labels.append("null")
    povm.classification = labels
    return labels


def construct_optimal(
    dec: SupportDecomposition,
    slds: SLDSet,
    W: Optional[np.ndarray] = None,
    lambdas: Optional[np.ndarray] = None,
    *,
    tol: float = 1e-8,
    rng: np.random.Generator | None = None,
) -> POVM:
    """Build the optimal projective measurement from certified structure.

    Regular elements project onto the joint eigenspaces of the ++ SLD
    blocks, pushed forward with the support isometry; null elements are the
    rank-one projectors onto the columns of ``Y W``. Requires commuting ++
    blocks, and ``W`` whenever the null space is nontrivial.
    """
    spectrum = nk.joint_eigenprojectors(slds.Lpp, tol=tol, rng=rng)
    elements = []
    classification = []
    for proj in spectrum.projectors:
        elements.append(nk.hermitize(dec.V @ proj @ dec.V.conj().T))
        classification.append("regular")

    if dec.r_zero > 0:
        if W is None:
            raise MissingAlignmentError(
                "null directions present: an alignment unitary W is required "
                "to build the null elements"
            )
        W = np.asarray(W, dtype=complex)
        if W.shape != (dec.r_zero, dec.r_zero):
            raise nk.ShapeError(f"W has shape {W.shape}, expected ({dec.r_zero}, {dec.r_zero})")
        for j in range(dec.r_zero):
            w = dec.Y @ W[:, j]
            elements.append(nk.hermitize(np.outer(w, w.conj())))
            classification.append("null")

    povm = POVM(
        elements=elements,
        classification=classification,
        meta={
            "regular_labels": spectrum.labels,
            "chi": spectrum.chi,
            "cond4_lambdas": lambdas,
        },
    )
    diag = validate(povm, tol=1e-10)
    if not (diag["valid"] and diag["projective"]):
        raise InvalidPOVMError("constructed measurement failed validation", diagnostics=diag)
    return povm


@dataclass
class ElementCertificate:
    index: int
    kind: str  # regular | null
    constants: dict  # regular: {l: c}; null: {(l, m): c}
    residuals: dict
    vacuous: list
    passed: bool

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "constants": {str(k): v for k, v in self.constants.items()},
            "residuals": {str(k): v for k, v in self.residuals.items()},
            "vacuous": [str(k) for k in self.vacuous],
            "passed": self.passed,
        }


@dataclass
class SaturationCertificate:
    records: list
    passed: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "elements": [r.to_dict() for r in self.records],
        }


def _fit_real(a: np.ndarray, b: np.ndarray):
    """Least-squares real constant c minimizing ||a - c b||; returns (c, resid)."""
    denom = float(np.vdot(b.ravel(), b.ravel()).real)
    c = float(np.vdot(b.ravel(), a.ravel()).real) / denom
    return c, float(np.linalg.norm(a - c * b))


def verify_saturation_structural(
    povm: POVM,
    dec: SupportDecomposition,
    slds: SLDSet,
    tol: float = 1e-8,
) -> SaturationCertificate:
    """Certify (or refute) saturation element by element.

    Regular elements are tested in full space against
    ``E L_l P+ = c E P+``; null elements against the reduced pairwise
    relation on the +0 blocks. Constraints whose right-hand side vanishes
    are recorded as vacuous rather than pass/fail.
    """
    if povm.classification is None:
        rho = dec.V @ np.diag(dec.q).astype(complex) @ dec.V.conj().T
        classify_elements(povm, rho, dec)

    p = slds.n_params
    records = []
    all_pass = True
    for k, e in enumerate(povm.elements):
        kind = povm.classification[k]
        constants, residuals, vacuous = {}, {}, []
        passed = True
        if kind == "regular":
            b = e @ dec.P_plus
            for l in range(p):
                a = e @ slds.full[l] @ dec.P_plus
                scale = max(1.0, nk.fro(e) * max(1.0, nk.fro(slds.full[l])))
                if nk.fro(b) <= tol * max(1.0, nk.fro(e)):
                    vacuous.append(l)
                    continue
                c, res = _fit_real(a, b)
                constants[l] = c
                residuals[l] = res / scale
                if res / scale > tol:
                    passed = False
        else:
            e00 = dec.Y.conj().T @ e @ dec.Y
            scale0 = max(1.0, nk.fro(e00) * max(1.0, max((nk.fro(L) for L in slds.Lpz), default=1.0)))
            for l in range(p):
                for m in range(p):
                    if l == m:
                        continue
                    a = e00 @ slds.Lpz[l].conj().T
                    b = e00 @ slds.Lpz[m].conj().T
                    if nk.fro(b) <= tol * scale0:
                        if nk.fro(a) <= tol * scale0:
                            vacuous.append((l, m))
                        else:
                            residuals[(l, m)] = nk.fro(a) / scale0
                            passed = False
                        continue
                    c, res = _fit_real(a, b)
                    constants[(l, m)] = c
                    residuals[(l, m)] = res / scale0
                    if res / scale0 > tol:
                        passed = False
        records.append(
            ElementCertificate(
                index=k, kind=kind, constants=constants, residuals=residuals,
                vacuous=vacuous, passed=passed,
            )
        )
        all_pass = all_pass and passed
    return SaturationCertificate(records=records, passed=all_pass, tol=tol)


# ---------------------------------------------------------------------------
# Random measurement generators (tests, negative controls).
# ---------------------------------------------------------------------------


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_projective_povm(n: int, rng: np.random.Generator) -> POVM:
    u = haar_unitary(n, rng)
    return POVM(elements=[np.outer(u[:, k], u[:, k].conj()) for k in range(n)])


def random_povm(n: int, m: int, rng: np.random.Generator) -> POVM:
    mats = []
    for _ in range(m):
        z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        mats.append(z @ z.conj().T)
    total = sum(mats)
    w, v = np.linalg.eigh(nk.hermitize(total))
    inv_sqrt = v @ np.diag(1.0 / np.sqrt(w)) @ v.conj().T
    return POVM(elements=[nk.hermitize(inv_sqrt @ a @ inv_sqrt) for a in mats])


# ---------------------------------------------------------------------------
# JSON serialization (complex entries as [re, im] pairs).
# ---------------------------------------------------------------------------


def povm_to_json(povm: POVM) -> dict:
    def enc(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

    return {
        "n_s": povm.dim,
        "elements": [enc(e) for e in povm.elements],
        "outcome_labels": povm.outcome_labels.tolist(),
        "classification": povm.classification,
    }


def povm_from_json(source) -> POVM:
    from .model import SchemaError, _parse_complex_matrix

    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    for key in ("n_s", "elements"):
        if key not in data:
            raise SchemaError(f"missing key {key!r}")
    n = data["n_s"]
    elements = [
        _parse_complex_matrix(e, n, f"elements[{k}]") for k, e in enumerate(data["elements"])
    ]
    labels = data.get("outcome_labels")
    return POVM(
        elements=elements,
        outcome_labels=None if labels is None else np.asarray(labels, dtype=float),
        classification=data.get("classification"),
    )
