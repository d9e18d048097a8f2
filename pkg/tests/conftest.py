import pytest

import qcrbsat as qs


@pytest.fixture(scope="session")
def qutrit_model():
    return qs.get("qutrit-phase-mixture", d=0.6, c1=1.0, c2=0.7)


@pytest.fixture(scope="session")
def qutrit_point(qutrit_model):
    return qs.evaluate(qutrit_model, [0.3, 0.5])


@pytest.fixture(scope="session")
def qutrit_dec(qutrit_point):
    return qs.support_decomposition(qutrit_point)


@pytest.fixture(scope="session")
def qutrit_slds(qutrit_dec, qutrit_point):
    return qs.compute_sld(qutrit_dec, qutrit_point.drho)


@pytest.fixture(scope="session")
def multinomial_model():
    return qs.get("diag-multinomial", dims=3)


@pytest.fixture(scope="session")
def pure_qubit_model():
    return qs.get("pure-qubit-amp-phase")


