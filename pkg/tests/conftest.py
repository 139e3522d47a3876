import numpy as np
import pytest

import wndkit as wk


@pytest.fixture(scope="session")
def wave2_spec():
    """Partially dissipative 2-component wave system: a = [[0,xi],[xi,0]], b = diag(xi^2, 0)."""
    adv = np.array([[[0.0, 1.0], [1.0, 0.0]]])
    dif = np.zeros((1, 1, 2, 2))
    dif[0, 0] = np.diag([1.0, 0.0])
    quad = np.zeros((1, 2, 2, 2))
    return wk.SystemSpec(1, 2, [0.0, 0.0], adv, dif, quad, np.eye(2))


@pytest.fixture(scope="session")
def scalar_spec():
    """Scalar advection-diffusion with quadratic flux q w^2 / 2 (q = 1)."""
    return wk.SystemSpec(1, 1, [0.0], [[[1.0]]], [[[[0.3]]]], [[[[0.5]]]], [[1.0]])


@pytest.fixture(scope="session")
def cns_model():
    return wk.build_preset("ideal-gas-2d")


@pytest.fixture(scope="session")
def cns_ops4(cns_model):
    lattice = wk.FrequencyLattice(2, 4)
    return wk.build_operators(
        cns_model.spec, lattice, exact_rule=wk.make_exact_resonance_rule(cns_model)
    )


@pytest.fixture(scope="session")
def cns_ops8(cns_model):
    lattice = wk.FrequencyLattice(2, 8)
    return wk.build_operators(
        cns_model.spec, lattice, exact_rule=wk.make_exact_resonance_rule(cns_model)
    )


def state_diff_norm(spec, a, b):
    probe = a.copy()
    probe.coeffs = a.coeffs - b.coeffs
    return wk.energy_norm(spec, probe)
