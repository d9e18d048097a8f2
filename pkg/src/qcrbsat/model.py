"""Parameterized density-matrix families and their support/null decomposition.

A :class:`StateModel` maps a real parameter vector to a density matrix and
optionally provides analytic parameter derivatives and a smooth isometry
whose columns track the support eigenbasis. :func:`evaluate` produces the
state and its derivatives at a point; :func:`support_decomposition` splits
the Hilbert space into the support (positive eigenvalues) and the null
space, which is the coordinate system every downstream check works in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import numkernel as nk
from .errors import QcrbSatError

HERM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_FLOOR = 1e-12
DEFAULT_FD_STEP = 1e-5
DEFAULT_RANK_TOL = 1e-10
AMBIGUITY_FACTOR = 10.0


class DomainError(QcrbSatError):
    pass


class InvalidStateError(QcrbSatError):
    pass


class TraceNotOneError(InvalidStateError):
    pass


class SchemaError(QcrbSatError):
    pass


class RankAmbiguousError(QcrbSatError):
    pass


class RankNotLocallyConstantError(QcrbSatError):
    pass


@dataclass(frozen=True)
class Box:
    """Open axis-aligned parameter domain."""

    lo: np.ndarray
    hi: np.ndarray

    def contains(self, theta: np.ndarray, margin: float = 0.0) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta > self.lo + margin) and np.all(theta < self.hi - margin))


def box(lo, hi) -> Box:
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    if lo.shape != hi.shape or np.any(lo >= hi):
        raise DomainError(f"invalid box lo={lo} hi={hi}")
    return Box(lo=lo, hi=hi)


@dataclass
class StateModel:
    """A smooth family theta -> rho(theta) of density matrices.

    ``derivative_fn(theta, l)`` returns the analytic derivative wrt the l-th
    parameter when available. ``support_basis_fn(theta)`` returns a smooth
    isometry whose columns are support eigenvectors; derivatives of that map
    are always taken by central differences on the map itself, never from
    per-point eigenvectors (whose gauge is arbitrary).
    """

    name: str
    dim: int
    n_params: int
    state_fn: Callable[[np.ndarray], np.ndarray]
    domain: Box
    derivative_fn: Optional[Callable[[np.ndarray, int], np.ndarray]] = None
    support_basis_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    params: dict | None = None


@dataclass
class StateAtPoint:
    """The state, its parameter derivatives, and how they were obtained."""

    theta: Optional[np.ndarray]
    rho: np.ndarray
    drho: np.ndarray  # (p, n, n)
    scheme: str  # "analytic" | "central_fd" | "richardson"
    fd_step: Optional[float] = None

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    @property
    def n_params(self) -> int:
        return self.drho.shape[0]

    @property
    def deriv_tol(self) -> float:
        """Residual tolerance appropriate for the derivative scheme."""
        return 1e-8 if self.scheme == "analytic" else 1e-4

    def scheme_label(self) -> str:
        if self.scheme == "analytic":
            return "analytic"
        return f"{self.scheme}(h={self.fd_step:g})"


@dataclass(frozen=True)
class SupportDecomposition:
    """Eigendata of rho split into support and null space.

    ``V`` (n x r_plus) holds the support eigenvectors with eigenvalues ``q``
    (ascending), ``Y`` (n x r_zero) an orthonormal basis of the null space.
    Operators are expressed in this split as ++, +0, 0+, 00 blocks.
    """

    q: np.ndarray
    V: np.ndarray
    Y: np.ndarray
    P_plus: np.ndarray
    P_zero: np.ndarray
    r_plus: int
    r_zero: int
    rank_tol: float


def _validate_density(rho: np.ndarray, dim: int | None = None) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError(f"state must be square, got {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise InvalidStateError(f"state has dimension {rho.shape[0]}, expected {dim}")
    scale = max(1.0, nk.fro(rho))
    if nk.herm_defect(rho) > HERM_TOL * scale:
        raise InvalidStateError(
            "state is not Hermitian", defect=nk.herm_defect(rho), tol=HERM_TOL
        )
    rho = nk.hermitize(rho)
    tr = float(np.trace(rho).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceNotOneError(f"state trace is {tr!r}, expected 1", trace=tr)
    wmin = float(np.linalg.eigvalsh(rho)[0])
    if wmin < -PSD_FLOOR:
        raise InvalidStateError(
            f"state is not positive semidefinite: min eigenvalue {wmin:.3e}", min_eig=wmin
        )
    return rho


def _validate_drho(d: np.ndarray, tol: float, which: int) -> np.ndarray:
    d = np.asarray(d, dtype=complex)
    scale = max(1.0, nk.fro(d))
    if nk.herm_defect(d) > tol * scale:
        raise InvalidStateError(
            f"derivative {which} is not Hermitian to tolerance", defect=nk.herm_defect(d)
        )
    d = nk.hermitize(d)
    tr = abs(complex(np.trace(d)))
    if tr > tol * scale:
        raise InvalidStateError(f"derivative {which} is not traceless: |tr| = {tr:.3e}", trace=tr)
    return d


def finite_difference_derivative(
    model: StateModel, theta: np.ndarray, l: int, h: float = DEFAULT_FD_STEP
) -> np.ndarray:
    """Central difference (rho(theta + h e_l) - rho(theta - h e_l)) / 2h."""
    if h <= 0:
        raise DomainError(f"step must be positive, got {h}")
    theta = np.asarray(theta, dtype=float)
    if not model.domain.contains(theta, margin=h):
        raise DomainError(
            f"theta {theta.tolist()} +/- {h} leaves the domain of {model.name}", theta=theta
        )
    e = np.zeros_like(theta)
    e[l] = h
    d = (model.state_fn(theta + e) - model.state_fn(theta - e)) / (2.0 * h)
    return nk.hermitize(np.asarray(d, dtype=complex))


def richardson_derivative(
    model: StateModel, theta: np.ndarray, l: int, h: float = DEFAULT_FD_STEP
) -> np.ndarray:
    """Richardson-extrapolated central difference, O(h^4)."""
    d_h = finite_difference_derivative(model, theta, l, h)
    d_h2 = finite_difference_derivative(model, theta, l, h / 2.0)
    return (4.0 * d_h2 - d_h) / 3.0


def evaluate(
    model: StateModel,
    theta,
    scheme: str = "auto",
    h: float = DEFAULT_FD_STEP,
) -> StateAtPoint:
    """Evaluate rho and all parameter derivatives at a point.

    ``scheme`` is one of "auto", "analytic", "central_fd", "richardson";
    "auto" uses analytic derivatives when the model provides them.
    """
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (model.n_params,):
        raise DomainError(
            f"theta has shape {theta.shape}, expected ({model.n_params},)", theta=theta
        )
    if not model.domain.contains(theta):
        raise DomainError(f"theta {theta.tolist()} outside the domain of {model.name}")

    if scheme == "auto":
        scheme = "analytic" if model.derivative_fn is not None else "central_fd"
    if scheme == "analytic" and model.derivative_fn is None:
        raise DomainError(f"model {model.name} has no analytic derivatives")
    if scheme not in ("analytic", "central_fd", "richardson"):
        raise DomainError(f"unknown derivative scheme {scheme!r}")

    rho = _validate_density(model.state_fn(theta), model.dim)

    tol = 1e-8 if scheme == "analytic" else 1e-4
    drho = []
    for l in range(model.n_params):
        if scheme == "analytic":
            d = np.asarray(model.derivative_fn(theta, l), dtype=complex)
        elif scheme == "central_fd":
            d = finite_difference_derivative(model, theta, l, h)
        else:
            d = richardson_derivative(model, theta, l, h)
        drho.append(_validate_drho(d, tol, l))

    return StateAtPoint(
        theta=theta,
        rho=rho,
        drho=np.array(drho),
        scheme=scheme,
        fd_step=None if scheme == "analytic" else h,
    )


def fix_phases(m: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-modulus entry is real positive."""
    m = np.array(m, dtype=complex)
    for j in range(m.shape[1]):
        col = m[:, j]
        i = int(np.argmax(np.abs(col)))
        z = col[i]
        if abs(z) > 0:
            m[:, j] = col * (abs(z) / z)
    return m


def _check_fixed_rank(sp: StateAtPoint, Y: np.ndarray) -> None:
    tol = sp.deriv_tol
    for l in range(sp.n_params):
        block = Y.conj().T @ sp.drho[l] @ Y
        scale = max(1.0, nk.fro(sp.drho[l]))
        if nk.fro(block) > tol * scale:
            raise RankNotLocallyConstantError(
                f"null-block of derivative {l} is nonzero "
                f"({nk.fro(block):.3e} > {tol:.1e} * {scale:.3e}); "
                "the rank of the family is not locally constant at this point",
                param=l,
                residual=nk.fro(block),
            )


def support_decomposition(sp: StateAtPoint, rank_tol: float = DEFAULT_RANK_TOL) -> SupportDecomposition:
    """Split the space into the support and null space of rho.

    Eigenvalues at or below ``rank_tol`` (relative to the largest one) are
    assigned to the null space and those above ``10 * rank_tol`` to the
    support; anything in between is refused as ambiguous rather than decided
    silently. The fixed-rank consistency P0 (d rho) P0 = 0 is verified for
    every parameter.
    """
    eig = nk.eig_hermitian(sp.rho, herm_tol=1e-10)
    w, q_vecs = eig.eigenvalues, eig.eigenvectors
    lam_max = float(w[-1])
    if lam_max <= 0:
        raise InvalidStateError("state has no positive eigenvalue")
    cut = rank_tol * lam_max
    null_mask = w <= cut
    support_mask = w >= AMBIGUITY_FACTOR * cut
    amb = ~(null_mask | support_mask)
    if np.any(amb):
        raise RankAmbiguousError(
            "eigenvalue(s) inside the rank ambiguity band "
            f"({cut:.3e}, {AMBIGUITY_FACTOR * cut:.3e}): {w[amb].tolist()}",
            eigenvalues=w[amb],
            band=[cut, AMBIGUITY_FACTOR * cut],
        )

    V = fix_phases(q_vecs[:, support_mask])
    Y = fix_phases(q_vecs[:, null_mask])
    q = np.asarray(w[support_mask], dtype=float)

    dec = SupportDecomposition(
        q=q,
        V=V,
        Y=Y,
        P_plus=nk.hermitize(V @ V.conj().T),
        P_zero=nk.hermitize(Y @ Y.conj().T),
        r_plus=V.shape[1],
        r_zero=Y.shape[1],
        rank_tol=rank_tol,
    )
    _check_fixed_rank(sp, Y)
    return dec


def decomposition_from_basis(
    sp: StateAtPoint,
    V: np.ndarray,
    rank_tol: float = DEFAULT_RANK_TOL,
    basis_tol: float = 1e-8,
) -> SupportDecomposition:
    """Support decomposition in the gauge of a supplied support eigenbasis.

    ``V`` must be an isometry whose columns are eigenvectors of rho (for
    instance from a model's smooth support-basis map); the eigenvalues are
    read off the diagonal of V^dag rho V in column order. The null basis is
    completed orthonormally.
    """
    V = np.asarray(V, dtype=complex)
    n = sp.dim
    if V.shape[0] != n or V.shape[1] > n:
        raise InvalidStateError(f"basis has shape {V.shape}, expected ({n}, r<= {n})")
    gram = V.conj().T @ V
    if nk.fro(gram - np.eye(V.shape[1])) > 1e-10 * max(1.0, V.shape[1]):
        raise InvalidStateError("support basis is not an isometry")

    m = V.conj().T @ sp.rho @ V
    q = np.diag(m).real.copy()
    off = nk.fro(m - np.diag(q))
    if off > basis_tol * max(1.0, nk.fro(sp.rho)):
        raise InvalidStateError(
            f"supplied basis does not diagonalize the state (residual {off:.3e})",
            residual=off,
        )
    lam_max = float(np.max(q))
    if np.any(q <= rank_tol * lam_max):
        raise InvalidStateError("supplied basis includes null directions", q=q)

    comp = np.eye(n) - V @ V.conj().T
    w, vecs = np.linalg.eigh(nk.hermitize(comp))
    Y = fix_phases(vecs[:, w > 0.5])
    if nk.fro(sp.rho @ Y) > basis_tol * max(1.0, nk.fro(sp.rho)):
        raise InvalidStateError("completed null basis is not annihilated by the state")

    dec = SupportDecomposition(
        q=q,
        V=V,
        Y=Y,
        P_plus=nk.hermitize(V @ V.conj().T),
        P_zero=nk.hermitize(Y @ Y.conj().T),
        r_plus=V.shape[1],
        r_zero=Y.shape[1],
        rank_tol=rank_tol,
    )
    _check_fixed_rank(sp, Y)
    return dec


# ---------------------------------------------------------------------------
# Numeric-model ingestion: a single point (rho, drho) supplied as JSON.
# Complex entries are [re, im] pairs; all matrices are n_s x n_s.
# ---------------------------------------------------------------------------


def _parse_complex_matrix(obj, n: int, what: str) -> np.ndarray:
    if not isinstance(obj, list) or len(obj) != n:
        raise SchemaError(f"{what}: expected {n} rows")
    out = np.zeros((n, n), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != n:
            raise SchemaError(f"{what}: row {i} must have {n} entries")
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) for x in entry)
            ):
                raise SchemaError(f"{what}: entry ({i},{j}) must be an [re, im] pair")
            out[i, j] = complex(entry[0], entry[1])
    if not np.all(np.isfinite(out.view(float))):
        raise SchemaError(f"{what}: non-finite entries")
    return out


def parse_numeric_model(source) -> StateAtPoint:
    """Parse a single-point numeric model from JSON.

    Schema: ``{"n_s": int, "p": int, "rho": [[[re, im], ...]], "drho":
    [matrix, ...]}`` with p derivative matrices. The payload is validated as
    a density matrix with Hermitian traceless derivatives; the result can
    feed every downstream check but supports no re-evaluation at other
    parameter values.
    """
    if isinstance(source, dict):
        data = source
    elif hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as fh:
            data = json.load(fh)

    for key in ("n_s", "p", "rho", "drho"):
        if key not in data:
            raise SchemaError(f"missing key {key!r}")
    n = data["n_s"]
    p = data["p"]
    if not isinstance(n, int) or n < 1:
        raise SchemaError("n_s must be a positive integer")
    if not isinstance(p, int) or p < 1:
        raise SchemaError("p must be a positive integer")

    rho = _parse_complex_matrix(data["rho"], n, "rho")
    if not isinstance(data["drho"], list) or len(data["drho"]) != p:
        raise SchemaError(f"drho must hold {p} matrices")
    drho = [_parse_complex_matrix(m, n, f"drho[{l}]") for l, m in enumerate(data["drho"])]

    rho = _validate_density(rho)
    drho = [_validate_drho(d, 1e-8, l) for l, d in enumerate(drho)]
    return StateAtPoint(theta=None, rho=rho, drho=np.array(drho), scheme="analytic")


def state_to_numeric_model(sp: StateAtPoint) -> dict:
    """Serialize a state point to the numeric-model JSON schema."""

    def enc(m):
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

    return {
        "n_s": sp.dim,
        "p": sp.n_params,
        "rho": enc(sp.rho),
        "drho": [enc(d) for d in sp.drho],
    }
