"""Built-in model registry.

Each entry wires a :class:`~qcrbsat.model.StateModel` with analytic
derivatives where closed forms exist, plus (when the family admits one) a
smooth support-basis map and a PDE witness for the condition-2' checks.
The planted synthetic generator produces rank-deficient instances whose
block structure satisfies the certifiable conditions by construction,
without integrating a family: the state and its derivatives are consistent
at the center point only.
"""

from __future__ import annotations

import numpy as np

from .conditions import Cond2PrimeWitness
from .errors import QcrbSatError
from .model import StateModel, box


class UnknownModelError(QcrbSatError):
    pass


class ParameterError(QcrbSatError):
    pass


def _as_complex(value) -> complex:
    try:
        return complex(value)
    except (TypeError, ValueError):
        raise ParameterError(f"cannot interpret {value!r} as a complex number")


# ---------------------------------------------------------------------------
# Rank-2 qutrit: a mixture of a basis state with a phase-carrying pure state.
# The support rotates with theta only through the relative phase
# phi = c1 theta1 + c2 theta2, which makes every saturability condition
# verifiable in closed form.
# ---------------------------------------------------------------------------


def qutrit_phase_mixture(d=0.6, c1=1.0, c2=0.7) -> StateModel:
    d = _as_complex(d)
    c1, c2 = float(c1), float(c2)
    if not (0.0 < abs(d) < 1.0):
        raise ParameterError(f"need 0 < |d| < 1, got |d| = {abs(d)}")
    if c1 == 0.0 or c2 == 0.0:
        raise ParameterError("c1 and c2 must be nonzero")
    s = np.sqrt(1.0 - abs(d) ** 2)

    def phi(theta):
        return c1 * theta[0] + c2 * theta[1]

    def state(theta):
        t1 = theta[0]
        e = np.exp(1j * phi(theta))
        return np.array(
            [
                [abs(d) ** 2 * (1 - t1), 0.0, (1 - t1) * d * s * e],
                [0.0, t1, 0.0],
                [(1 - t1) * np.conj(d) * s * np.conj(e), 0.0, (1 - t1) * (1 - abs(d) ** 2)],
            ],
            dtype=complex,
        )

    def derivative(theta, l):
        t1 = theta[0]
        e = np.exp(1j * phi(theta))
        if l == 0:
            top = d * s * (-1.0 + 1j * c1 * (1 - t1)) * e
            return np.array(
                [
                    [-abs(d) ** 2, 0.0, top],
                    [0.0, 1.0, 0.0],
                    [np.conj(top), 0.0, -(1 - abs(d) ** 2)],
                ],
                dtype=complex,
            )
        top = 1j * c2 * (1 - t1) * d * s * e
        return np.array(
            [[0.0, 0.0, top], [0.0, 0.0, 0.0], [np.conj(top), 0.0, 0.0]], dtype=complex
        )

    def support_basis(theta):
        e = np.exp(1j * phi(theta))
        return np.array([[0.0, d * e], [1.0, 0.0], [0.0, s]], dtype=complex)

    return StateModel(
        name="qutrit-phase-mixture",
        dim=3,
        n_params=2,
        state_fn=state,
        derivative_fn=derivative,
        support_basis_fn=support_basis,
        domain=box([0.0, 0.0], [1.0, 1.0]),
        params={"d": d, "c1": c1, "c2": c2},
    )


def qutrit_null_basis(d=0.6, c1=1.0, c2=0.7):
    """Closed-form smooth null-space basis of the qutrit family."""
    d = _as_complex(d)
    s = np.sqrt(1.0 - abs(d) ** 2)

    def y(theta):
        e = np.exp(-1j * (c1 * theta[0] + c2 * theta[1]))
        return np.array([[s], [0.0], [-np.conj(d) * e]], dtype=complex)

    return y


def _qutrit_witness(d=0.6, c1=1.0, c2=0.7) -> Cond2PrimeWitness:
    d = _as_complex(d)
    dd = abs(d) ** 2

    def u(theta):
        return np.diag([1.0, np.exp(1j * dd * (c1 * theta[0] + c2 * theta[1]))]).astype(complex)

    return Cond2PrimeWitness(unitary_fn=u, generators=None, label="user_supplied_U")


# ---------------------------------------------------------------------------
# Classical full-rank family: diagonal multinomial probabilities.
# ---------------------------------------------------------------------------


def diag_multinomial(dims=3) -> StateModel:
    dims = int(dims)
    if dims < 2:
        raise ParameterError(f"need dims >= 2, got {dims}")
    p = dims - 1

    def state(theta):
        probs = np.concatenate([theta, [1.0 - float(np.sum(theta))]])
        return np.diag(probs).astype(complex)

    def derivative(theta, l):
        d = np.zeros(dims)
        d[l], d[-1] = 1.0, -1.0
        return np.diag(d).astype(complex)

    return StateModel(
        name="diag-multinomial",
        dim=dims,
        n_params=p,
        state_fn=state,
        derivative_fn=derivative,
        domain=box([0.0] * p, [1.0] * p),
        params={"dims": dims},
    )


# ---------------------------------------------------------------------------
# Pure qubit with amplitude and phase parameters: the standard negative
# control (average commutativity fails, so no single-copy measurement
# saturates the bound).
# ---------------------------------------------------------------------------


def pure_qubit_amp_phase() -> StateModel:
    def psi(theta):
        return np.array([np.cos(theta[0]), np.exp(1j * theta[1]) * np.sin(theta[0])])

    def dpsi(theta, l):
        if l == 0:
            return np.array([-np.sin(theta[0]), np.exp(1j * theta[1]) * np.cos(theta[0])])
        return np.array([0.0, 1j * np.exp(1j * theta[1]) * np.sin(theta[0])])

    def state(theta):
        v = psi(theta)
        return np.outer(v, v.conj())

    def derivative(theta, l):
        v, dv = psi(theta), dpsi(theta, l)
        return np.outer(dv, v.conj()) + np.outer(v, dv.conj())

    return StateModel(
        name="pure-qubit-amp-phase",
        dim=2,
        n_params=2,
        state_fn=state,
        derivative_fn=derivative,
        domain=box([0.01, -3.2], [1.55, 3.2]),
        params={},
    )


# ---------------------------------------------------------------------------
# Theta-independent support: a fixed support subspace carrying classical
# probabilities, with gauge phases on the basis map. The unitary path of
# the basis map itself witnesses the PDE condition.
# ---------------------------------------------------------------------------


def _fixed_unitary(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _ti_gauge_path(theta):
    return np.diag(np.exp(1j * np.array([theta[0], theta[1], 0.0]))).astype(complex)


def theta_independent_support() -> StateModel:
    b = _fixed_unitary(4, seed=71)[:, :3]

    def q_of(theta):
        return np.array([theta[0], theta[1], 1.0 - theta[0] - theta[1]])

    def state(theta):
        return b @ np.diag(q_of(theta)).astype(complex) @ b.conj().T

    def derivative(theta, l):
        dq = np.array([1.0, 0.0, -1.0]) if l == 0 else np.array([0.0, 1.0, -1.0])
        return b @ np.diag(dq).astype(complex) @ b.conj().T

    def support_basis(theta):
        return b @ _ti_gauge_path(theta)

    return StateModel(
        name="theta-independent-support",
        dim=4,
        n_params=2,
        state_fn=state,
        derivative_fn=derivative,
        support_basis_fn=support_basis,
        domain=box([0.0, 0.0], [1.0, 1.0]),
        params={},
    )


# ---------------------------------------------------------------------------
# Stationary basis map: the support rotates under a fixed off-block
# generator, but the map satisfies dV^dag V = 0, so the identity path
# witnesses the PDE condition and all information sits in the +0 blocks.
# ---------------------------------------------------------------------------


def stationary_basis(c1=1.0, c2=0.7) -> StateModel:
    c1, c2 = float(c1), float(c2)
    if c1 == 0.0 or c2 == 0.0:
        raise ParameterError("c1 and c2 must be nonzero")
    g = np.zeros((4, 4), dtype=complex)
    g[:2, 2:] = np.array([[1.0, 0.5], [0.3, -0.2]])
    g[2:, :2] = g[:2, 2:].conj().T
    gw, gv = np.linalg.eigh(g)
    v0 = np.eye(4, dtype=complex)[:, :2]
    q0 = np.array([0.65, 0.35])

    def rot(theta):
        phase = c1 * theta[0] + c2 * theta[1]
        return gv @ np.diag(np.exp(1j * phase * gw)) @ gv.conj().T

    def support_basis(theta):
        return rot(theta) @ v0

    def state(theta):
        v = support_basis(theta)
        return v @ np.diag(q0).astype(complex) @ v.conj().T

    def derivative(theta, l):
        rho = state(theta)
        c = c1 if l == 0 else c2
        return 1j * c * (g @ rho - rho @ g)

    return StateModel(
        name="stationary-basis",
        dim=4,
        n_params=2,
        state_fn=state,
        derivative_fn=derivative,
        support_basis_fn=support_basis,
        domain=box([-2.0, -2.0], [2.0, 2.0]),
        params={"c1": c1, "c2": c2},
    )


# ---------------------------------------------------------------------------
# Seeded synthetic instances with planted block structure. The family is
# affine around the center point, so the derivatives are exact there; tests
# analyze the center only.
# ---------------------------------------------------------------------------


def random_rank_r(
    seed=0,
    n_s=4,
    r_plus=2,
    n_params=2,
    plant_cond1=True,
    plant_cond4=True,
    vanish_columns=0,
) -> StateModel:
    seed, n_s, r_plus, n_params = int(seed), int(n_s), int(r_plus), int(n_params)
    vanish_columns = int(vanish_columns)
    r_zero = n_s - r_plus
    if r_plus < 1 or r_zero < 0:
        raise ParameterError(f"invalid sizes n_s={n_s}, r_plus={r_plus}")
    if plant_cond4 and r_zero > r_plus:
        raise ParameterError("planting column alignment needs r_zero <= r_plus")
    rng = np.random.default_rng(seed)

    u = _fixed_unitary_from(rng, n_s)
    v, y = u[:, :r_plus], u[:, r_plus:]
    q = rng.uniform(0.5, 1.5, r_plus)
    q = q / q.sum()

    lpp = []
    if plant_cond1:
        qb = _fixed_unitary_from(rng, r_plus)
        for _ in range(n_params):
            lam = rng.normal(size=r_plus)
            m = qb @ np.diag(lam).astype(complex) @ qb.conj().T
            lpp.append(m - np.trace(np.diag(q) @ m).real * np.eye(r_plus))
    else:
        for _ in range(n_params):
            z = rng.standard_normal((r_plus, r_plus)) + 1j * rng.standard_normal(
                (r_plus, r_plus)
            )
            m = (z + z.conj().T) / 2.0
            lpp.append(m - np.trace(np.diag(q) @ m).real * np.eye(r_plus))

    lpz = []
    if r_zero == 0:
        lpz = [np.zeros((r_plus, 0), dtype=complex) for _ in range(n_params)]
    elif plant_cond4:
        z = rng.standard_normal((r_plus, r_zero)) + 1j * rng.standard_normal((r_plus, r_zero))
        frame = np.linalg.qr(z)[0]
        w0 = _fixed_unitary_from(rng, r_zero)
        mu = rng.uniform(0.2, 1.0, size=(n_params, r_zero)) * rng.choice(
            [-1.0, 1.0], size=(n_params, r_zero)
        )
        mu[:, : max(0, vanish_columns)] = 0.0
        for l in range(n_params):
            lpz.append((frame * mu[l]) @ w0.conj().T)
    else:
        for _ in range(n_params):
            lpz.append(
                rng.standard_normal((r_plus, r_zero)) + 1j * rng.standard_normal((r_plus, r_zero))
            )

    rho0 = v @ np.diag(q).astype(complex) @ v.conj().T
    drho = []
    for l in range(n_params):
        sym = lpp[l] * (q[:, None] + q[None, :]) / 2.0
        cross = 0.5 * (np.diag(q).astype(complex) @ lpz[l])
        d = v @ sym @ v.conj().T + v @ cross @ y.conj().T + y @ cross.conj().T @ v.conj().T
        drho.append((d + d.conj().T) / 2.0)

    def state(theta):
        return rho0 + sum(theta[l] * drho[l] for l in range(n_params))

    def derivative(theta, l):
        return drho[l]

    return StateModel(
        name=f"random-rank-r(seed={seed})",
        dim=n_s,
        n_params=n_params,
        state_fn=state,
        derivative_fn=derivative,
        domain=box([-0.1] * n_params, [0.1] * n_params),
        params={
            "seed": seed,
            "n_s": n_s,
            "r_plus": r_plus,
            "plant_cond1": plant_cond1,
            "plant_cond4": plant_cond4,
        },
    )


def _fixed_unitary_from(rng: np.random.Generator, n: int) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

_REGISTRY = {
    "qutrit-phase-mixture": qutrit_phase_mixture,
    "diag-multinomial": diag_multinomial,
    "pure-qubit-amp-phase": pure_qubit_amp_phase,
    "theta-independent-support": theta_independent_support,
    "stationary-basis": stationary_basis,
    "random-rank-r": random_rank_r,
}

_ALIASES = {
    "paper-qutrit": "qutrit-phase-mixture",
    "corrigendum-lcss": "qutrit-phase-mixture",
}


def registry_names() -> list:
    return sorted(_REGISTRY)


def get(name: str, **params) -> StateModel:
    """Instantiate a registered model; parameters are validated by the builder."""
    key = _ALIASES.get(name, name)
    if key not in _REGISTRY:
        raise UnknownModelError(
            f"unknown model {name!r}; available: {', '.join(registry_names())}"
        )
    return _REGISTRY[key](**params)


def get_witness(name: str, **params):
    """PDE witness for models that ship one, else None."""
    key = _ALIASES.get(name, name)
    if key == "qutrit-phase-mixture":
        return _qutrit_witness(**params)
    if key == "theta-independent-support":
        return Cond2PrimeWitness(unitary_fn=_ti_gauge_path, generators=None)
    if key == "stationary-basis":
        return Cond2PrimeWitness(unitary_fn=lambda theta: np.eye(2, dtype=complex), generators=None)
    return None
