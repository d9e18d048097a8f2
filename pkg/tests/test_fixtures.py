import numpy as np
import pytest

import qcrbsat as qs
from qcrbsat import fixtures as fx
from qcrbsat import numkernel as nk


class TestRegistry:
    def test_names(self):
        names = qs.registry_names()
        for expected in (
            "qutrit-phase-mixture",
            "diag-multinomial",
            "pure-qubit-amp-phase",
            "theta-independent-support",
            "stationary-basis",
            "random-rank-r",
        ):
            assert expected in names

    def test_aliases_resolve(self):
        a = qs.get("paper-qutrit", d=0.6, c1=1.0, c2=0.7)
        b = qs.get("corrigendum-lcss", d=0.6, c1=1.0, c2=0.7)
        assert a.name == b.name == "qutrit-phase-mixture"

    def test_unknown_name(self):
        with pytest.raises(fx.UnknownModelError):
            qs.get("no-such-model")

    def test_parameter_validation(self):
        with pytest.raises(fx.ParameterError):
            qs.get("qutrit-phase-mixture", d=1.2)
        with pytest.raises(fx.ParameterError):
            qs.get("qutrit-phase-mixture", c1=0.0)
        with pytest.raises(fx.ParameterError):
            qs.get("diag-multinomial", dims=1)

    def test_witnesses_exposed(self):
        for name in ("paper-qutrit", "theta-independent-support", "stationary-basis"):
            assert qs.get_witness(name) is not None
        assert qs.get_witness("diag-multinomial") is None


class TestQutritFamily:
    def test_rank_two_on_grid(self, qutrit_model):
        for t1 in np.linspace(0.1, 0.9, 5):
            for t2 in np.linspace(0.1, 0.9, 5):
                sp = qs.evaluate(qutrit_model, [t1, t2])
                dec = qs.support_decomposition(sp)
                assert dec.r_plus == 2

    def test_complex_d_supported(self):
        m = qs.get("qutrit-phase-mixture", d=0.3 + 0.4j, c1=0.5, c2=-1.1)
        sp = qs.evaluate(m, [0.4, 0.6])
        dec = qs.support_decomposition(sp)
        slds = qs.compute_sld(dec, sp.drho)
        rep = qs.evaluate_conditions(sp, dec, slds)
        assert rep.verdict == "SATURABLE_CERTIFIED"

    def test_smooth_null_basis_matches(self, qutrit_model):
        theta = np.array([0.3, 0.5])
        y = fx.qutrit_null_basis(d=0.6, c1=1.0, c2=0.7)(theta)
        sp = qs.evaluate(qutrit_model, theta)
        assert nk.fro(sp.rho @ y) <= 1e-12
        assert np.vdot(y[:, 0], y[:, 0]).real == pytest.approx(1.0, abs=1e-12)


class TestSyntheticFamilies:
    @pytest.mark.parametrize("seed", range(20))
    def test_planted_instances_certify(self, seed):
        m = qs.get("random-rank-r", seed=seed, n_s=4 + seed % 2, r_plus=2 + seed % 2)
        sp = qs.evaluate(m, np.zeros(2))
        dec = qs.support_decomposition(sp)
        assert dec.r_plus == 2 + seed % 2
        slds = qs.compute_sld(dec, sp.drho)
        rep = qs.evaluate_conditions(sp, dec, slds)
        assert rep.cond1.passed
        assert rep.cond4.status == "CERTIFIED_YES"
        assert rep.verdict == "SATURABLE_CERTIFIED"

    def test_planting_requires_room(self):
        with pytest.raises(fx.ParameterError):
            qs.get("random-rank-r", seed=0, n_s=5, r_plus=2)  # r_zero=3 > r_plus

    def test_fd_matches_analytic_on_affine_family(self):
        m = qs.get("random-rank-r", seed=3)
        sp_a = qs.evaluate(m, np.zeros(2))
        sp_fd = qs.evaluate(m, np.zeros(2), scheme="central_fd")
        assert np.abs(sp_a.drho - sp_fd.drho).max() <= 1e-10

    def test_theta_independent_support_structure(self):
        m = qs.get("theta-independent-support")
        sp = qs.evaluate(m, [0.3, 0.45])
        dec = qs.support_decomposition(sp)
        assert (dec.r_plus, dec.r_zero) == (3, 1)
        slds = qs.compute_sld(dec, sp.drho)
        assert max(nk.fro(L) for L in slds.Lpz) <= 1e-10

    def test_stationary_basis_structure(self):
        m = qs.get("stationary-basis", c1=1.0, c2=0.7)
        sp = qs.evaluate(m, [0.4, 0.25])
        dec = qs.support_decomposition(sp)
        assert (dec.r_plus, dec.r_zero) == (2, 2)
        slds = qs.compute_sld(dec, sp.drho)
        assert max(nk.fro(L) for L in slds.Lpp) <= 1e-10
        assert min(nk.fro(L) for L in slds.Lpz) > 0.1
        # the basis map is stationary: dV^dag V = 0
        v_fn = m.support_basis_fn
        theta = np.array([0.4, 0.25])
        h = 1e-6
        for l in range(2):
            e = np.zeros(2)
            e[l] = h
            dv = (v_fn(theta + e) - v_fn(theta - e)) / (2 * h)
            assert nk.fro(dv.conj().T @ v_fn(theta)) <= 1e-8
