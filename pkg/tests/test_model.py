import json

import numpy as np
import pytest

import qcrbsat as qs
from qcrbsat import model as md
from qcrbsat import numkernel as nk


class TestEvaluate:
    def test_qutrit_frozen_values(self, qutrit_point):
        rho = qutrit_point.rho
        assert np.allclose(np.diag(rho).real, [0.252, 0.3, 0.448], atol=1e-15)
        assert rho[0, 2] == pytest.approx(0.336 * np.exp(0.65j), abs=1e-15)

    def test_constant_model_zero_derivatives(self):
        m = md.StateModel(
            name="constant",
            dim=3,
            n_params=2,
            state_fn=lambda theta: np.eye(3, dtype=complex) / 3.0,
            domain=md.box([-1, -1], [1, 1]),
        )
        sp = qs.evaluate(m, [0.1, 0.2])
        assert sp.scheme == "central_fd"
        assert np.abs(sp.drho).max() == 0.0

    def test_central_fd_exact_on_affine_family(self):
        delta = np.diag([1.0, -1.0]).astype(complex)
        m = md.StateModel(
            name="affine",
            dim=2,
            n_params=1,
            state_fn=lambda theta: np.diag([0.5, 0.5]).astype(complex) + theta[0] * delta,
            domain=md.box([-0.2], [0.2]),
        )
        sp = qs.evaluate(m, [0.05])
        assert np.allclose(sp.drho[0], delta, atol=1e-12)

    def test_domain_violation(self, qutrit_model):
        with pytest.raises(md.DomainError):
            qs.evaluate(qutrit_model, [1.2, 0.5])

    def test_fd_needs_margin(self, qutrit_model):
        with pytest.raises(md.DomainError):
            qs.evaluate(qutrit_model, [1 - 1e-7, 0.5], scheme="central_fd", h=1e-5)

    def test_invalid_state_caught(self):
        m = md.StateModel(
            name="broken",
            dim=2,
            n_params=1,
            state_fn=lambda theta: np.diag([0.7, 0.7]).astype(complex),
            domain=md.box([0], [1]),
        )
        with pytest.raises(md.TraceNotOneError):
            qs.evaluate(m, [0.5])


class TestFiniteDifferences:
    def test_qutrit_phase_derivative_structure(self, qutrit_model):
        theta = np.array([0.3, 0.5])
        d = md.finite_difference_derivative(qutrit_model, theta, 1, h=1e-5)
        expected = 1j * 0.7 * 0.7 * 0.6 * 0.8 * np.exp(0.65j)  # i c2 (1-t1) d s e^{i phi}
        mask = np.zeros((3, 3), bool)
        mask[0, 2] = mask[2, 0] = True
        assert np.abs(d[~mask]).max() <= 1e-11
        assert d[0, 2] == pytest.approx(expected, abs=1e-9)

    def test_fd_second_order_convergence(self):
        # central differences are exact on quadratics, so use a smooth
        # trigonometric family to see the O(h^2) error drop
        def state(theta):
            c, s = np.cos(theta[0]), np.sin(theta[0])
            return np.array([[c**2, c * s], [c * s, s**2]], dtype=complex)

        m = md.StateModel(name="trig", dim=2, n_params=1, state_fn=state, domain=md.box([-2], [2]))
        exact = md.finite_difference_derivative(m, np.array([0.4]), 0, h=1e-8)
        err_h = nk.fro(md.finite_difference_derivative(m, np.array([0.4]), 0, h=1e-3) - exact)
        err_h2 = nk.fro(md.finite_difference_derivative(m, np.array([0.4]), 0, h=5e-4) - exact)
        assert err_h / err_h2 == pytest.approx(4.0, rel=0.15)

    def test_richardson_beats_plain_fd(self, qutrit_model):
        theta = np.array([0.3, 0.5])
        analytic = qs.evaluate(qutrit_model, theta).drho
        fd = qs.evaluate(qutrit_model, theta, scheme="central_fd", h=1e-4).drho
        rich = qs.evaluate(qutrit_model, theta, scheme="richardson", h=1e-4).drho
        assert np.abs(rich - analytic).max() < np.abs(fd - analytic).max() / 10

    def test_fd_vs_analytic_h_squared(self, qutrit_model):
        theta = np.array([0.3, 0.5])
        analytic = qs.evaluate(qutrit_model, theta).drho
        errs = []
        for h in (1e-3, 5e-4):
            fd = qs.evaluate(qutrit_model, theta, scheme="central_fd", h=h).drho
            errs.append(np.abs(fd - analytic).max())
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.2)


class TestSupportDecomposition:
    def test_qutrit_split(self, qutrit_dec):
        assert qutrit_dec.r_plus == 2
        assert qutrit_dec.r_zero == 1
        assert np.allclose(qutrit_dec.q, [0.3, 0.7], atol=1e-12)

    def test_qutrit_null_direction(self, qutrit_dec):
        y_expected = np.array([0.8, 0.0, -0.6 * np.exp(-0.65j)])
        overlap = abs(np.vdot(qutrit_dec.Y[:, 0], y_expected))
        assert overlap == pytest.approx(1.0, abs=1e-12)

    def test_projector_algebra(self, qutrit_dec):
        d = qutrit_dec
        assert nk.fro(d.P_plus + d.P_zero - np.eye(3)) <= 1e-12
        assert nk.fro(d.V.conj().T @ d.V - np.eye(2)) <= 1e-12
        assert nk.fro(d.Y.conj().T @ d.Y - np.eye(1)) <= 1e-12
        assert nk.fro(d.V.conj().T @ d.Y) <= 1e-12

    def test_reconstruction(self, qutrit_point, qutrit_dec):
        d = qutrit_dec
        rebuilt = d.V @ np.diag(d.q).astype(complex) @ d.V.conj().T
        assert nk.fro(rebuilt - qutrit_point.rho) <= 1e-10

    def test_full_rank(self, multinomial_model):
        sp = qs.evaluate(multinomial_model, [1 / 3, 1 / 3])
        dec = qs.support_decomposition(sp)
        assert dec.r_zero == 0
        assert nk.fro(dec.P_plus - np.eye(3)) <= 1e-12

    def test_pure_state(self, pure_qubit_model):
        sp = qs.evaluate(pure_qubit_model, [0.7, 0.2])
        dec = qs.support_decomposition(sp)
        assert dec.r_plus == 1
        assert dec.q == pytest.approx([1.0], abs=1e-12)

    def test_rank_ambiguity_band(self):
        lam = 3e-10  # inside (1e-10, 1e-9) relative to the top eigenvalue ~ 1
        rho = np.diag([0.6, 0.4 - lam, lam]).astype(complex)
        sp = md.StateAtPoint(theta=np.zeros(1), rho=rho, drho=np.zeros((1, 3, 3)), scheme="analytic")
        with pytest.raises(md.RankAmbiguousError):
            qs.support_decomposition(sp)

    def test_rank_not_locally_constant(self):
        rho = np.diag([0.5, 0.5, 0.0]).astype(complex)
        drho = np.diag([-0.5, -0.5, 1.0]).astype(complex)[None]
        sp = md.StateAtPoint(theta=np.zeros(1), rho=rho, drho=drho, scheme="analytic")
        with pytest.raises(md.RankNotLocallyConstantError):
            qs.support_decomposition(sp)

    def test_phase_fixing_deterministic(self, qutrit_dec):
        for mat in (qutrit_dec.V, qutrit_dec.Y):
            for j in range(mat.shape[1]):
                top = mat[np.argmax(np.abs(mat[:, j])), j]
                assert top.imag == pytest.approx(0.0, abs=1e-14)
                assert top.real > 0

    def test_from_basis_matches_map_order(self, qutrit_model, qutrit_point):
        v = qutrit_model.support_basis_fn(qutrit_point.theta)
        dec = qs.decomposition_from_basis(qutrit_point, v)
        assert np.allclose(dec.q, [0.3, 0.7], atol=1e-12)  # map column order
        assert nk.fro(dec.V - v) == 0.0


class TestNumericModel:
    def test_roundtrip_bit_for_bit(self, qutrit_point, tmp_path):
        payload = md.state_to_numeric_model(qutrit_point)
        path = tmp_path / "model.json"
        path.write_text(json.dumps(payload))
        sp = qs.parse_numeric_model(str(path))
        assert np.array_equal(sp.rho, qutrit_point.rho)
        assert np.array_equal(sp.drho, qutrit_point.drho)

    def test_trace_not_one(self, qutrit_point):
        payload = md.state_to_numeric_model(qutrit_point)
        payload["rho"][0][0][0] -= 0.1
        with pytest.raises(md.TraceNotOneError):
            qs.parse_numeric_model(payload)

    def test_ragged_rows(self, qutrit_point):
        payload = md.state_to_numeric_model(qutrit_point)
        payload["rho"][1] = payload["rho"][1][:2]
        with pytest.raises(md.SchemaError):
            qs.parse_numeric_model(payload)

    def test_non_hermitian_payload(self, qutrit_point):
        payload = md.state_to_numeric_model(qutrit_point)
        payload["rho"][0][1] = [0.3, 0.0]
        with pytest.raises(md.InvalidStateError):
            qs.parse_numeric_model(payload)

    def test_missing_key(self):
        with pytest.raises(md.SchemaError):
            qs.parse_numeric_model({"n_s": 2, "p": 1, "rho": []})
