import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import wndkit as wk
from wndkit.dissipativity import (
    analyze_dissipativity,
    constructive_delta,
    criterion_beta,
    kawashima_check,
    report_directions,
    strict_criterion_search,
    verify_delta,
)


def test_kawashima_positive_definite_diffusion():
    spec = wk.SystemSpec(1, 2, [0, 0], np.zeros((1, 2, 2)),
                         np.eye(2).reshape(1, 1, 2, 2), np.zeros((1, 2, 2, 2)), np.eye(2))
    ok, witnesses = kawashima_check(spec, np.array([[1.0], [-1.0]]))
    assert ok and not witnesses


def test_kawashima_wave_pair(wave2_spec):
    ok, witnesses = kawashima_check(wave2_spec, np.array([[1.0], [-1.0]]))
    assert ok and not witnesses


def test_kawashima_counterexample():
    dif = np.zeros((1, 1, 2, 2))
    dif[0, 0] = np.diag([1.0, 0.0])
    spec = wk.SystemSpec(1, 2, [0, 0], np.zeros((1, 2, 2)), dif, np.zeros((1, 2, 2, 2)), np.eye(2))
    ok, witnesses = kawashima_check(spec, np.array([[1.0]]))
    assert not ok
    assert any(np.allclose(np.abs(w.vector), [0.0, 1.0], atol=1e-12) for w in witnesses)


def test_kawashima_invariant_under_change_of_variables(wave2_spec):
    rng = np.random.Generator(np.random.Philox(key=5))
    transform = np.eye(2) + 0.3 * rng.standard_normal((2, 2))
    primed = wk.change_of_variables(wave2_spec, transform)
    dirs = np.array([[1.0], [-1.0]])
    assert kawashima_check(wave2_spec, dirs)[0] == kawashima_check(primed, dirs)[0]


def test_criterion_beta_wave_example(wave2_spec):
    assert criterion_beta(wave2_spec, 1.0, np.array([[1.0], [-1.0]])) == pytest.approx(1.0)


def test_strict_search_uniform_parabolic():
    dif = np.zeros((1, 1, 2, 2))
    dif[0, 0] = 0.7 * np.eye(2)
    spec = wk.SystemSpec(1, 2, [0, 0], np.zeros((1, 2, 2)), dif, np.zeros((1, 2, 2, 2)), np.eye(2))
    result = strict_criterion_search(spec, np.array([[1.0], [-1.0]]))
    assert result.ok and result.beta >= 0.7 - 1e-12


def test_strict_search_failure_is_a_value():
    spec = wk.SystemSpec(1, 2, [0, 0], np.zeros((1, 2, 2)), np.zeros((1, 1, 2, 2)),
                         np.zeros((1, 2, 2, 2)), np.eye(2))
    result = strict_criterion_search(spec, np.array([[1.0]]))
    assert not result.ok
    assert result.delta == 0.0


def test_constructive_delta_reference_values():
    epsilon, delta = constructive_delta(1.0, 1.0, 1.0, 1.0)
    assert epsilon == pytest.approx(1.0 / 8.0)
    assert delta == pytest.approx(1.0 / 24.0)


def test_constructive_delta_monotonicity():
    _, d_base = constructive_delta(1.0, 1.0, 1.0, 1.0)
    _, d_big_adv = constructive_delta(1.0, 1.0, 2.0, 1.0)
    assert d_big_adv < d_base
    _, d_small_beta = constructive_delta(1.0, 1e-6, 1.0, 1.0)
    assert d_small_beta < d_base


@given(
    st.floats(1e-2, 1e2), st.floats(1e-3, 10), st.floats(1e-1, 10), st.floats(1e-1, 10)
)
@settings(max_examples=100, deadline=None)
def test_constructive_delta_ordering(alpha, beta, c_adv, c_diff):
    epsilon, delta = constructive_delta(alpha, beta, c_adv, c_diff)
    assert 0.0 < delta < epsilon < beta / 4.0 + 1e-15


def test_constructive_delta_rejects_nonpositive():
    with pytest.raises(ValueError):
        constructive_delta(1.0, 0.0, 1.0, 1.0)


def test_verify_delta_scalar_heat():
    spec = wk.SystemSpec(1, 1, [0.0], [[[0.0]]], [[[[0.4]]]], [[[[0.0]]]], [[1.0]])
    lat = wk.FrequencyLattice(1, 3)
    ops = wk.build_operators(spec, lat, with_quadratic=False)
    assert verify_delta(spec, ops.avg) == pytest.approx(0.4)


def test_wave_example_certificate(wave2_spec):
    lat = wk.FrequencyLattice(1, 4)
    ops = wk.build_operators(wave2_spec, lat, with_quadratic=False)
    report = analyze_dissipativity(wave2_spec, lat, ops.avg, alphas=np.array([1.0]))
    assert report.kawashima_ok
    assert report.beta == pytest.approx(1.0)
    assert report.epsilon == pytest.approx(1.0 / 8.0)
    assert report.delta == pytest.approx(1.0 / 24.0)
    assert report.delta_empirical == pytest.approx(0.5, rel=1e-10)
    assert report.delta_empirical >= report.delta - 1e-9


def test_cns_certificate(cns_model, cns_ops4):
    lat = cns_ops4.lattice
    report = analyze_dissipativity(cns_model.spec, lat, cns_ops4.avg)
    assert report.kawashima_ok and report.criterion_ok
    assert report.delta > 0.0
    assert report.delta_empirical >= report.delta - 1e-9


def test_delta_positive_implies_kawashima(cns_model, cns_ops4):
    report = analyze_dissipativity(cns_model.spec, cns_ops4.lattice, cns_ops4.avg)
    if report.delta > 0:
        assert report.kawashima_ok


def test_generalized_eigs_scale_with_mode_square(cns_model, cns_ops8):
    import scipy.linalg

    g = cns_model.spec.entropy_hessian.astype(complex)
    base = None
    for mult in (1, 2, 4):
        mode = (mult, 0)
        gd = g @ cns_ops8.avg.block(mode)
        herm = -0.5 * (gd + gd.conj().T)
        vals = scipy.linalg.eigh(herm, g, eigvals_only=True)
        scaled = vals / mult**2
        if base is None:
            base = scaled
        assert np.abs(scaled - base).max() <= 1e-10 * max(1.0, np.abs(base).max())


def test_euler_has_no_certificate(cns_model):
    euler = wk.build_cns_spec(cns_model.eos, wk.TransportCoefficients(0, 0, 0, 3), 1.0, 1.0, 2)
    lat = wk.FrequencyLattice(2, 2)
    ops = wk.build_operators(euler, lat, with_quadratic=False)
    report = analyze_dissipativity(euler, lat, ops.avg)
    assert not report.criterion_ok and not report.kawashima_ok
    assert report.delta == 0.0


def test_report_directions_include_axes(cns_model):
    dirs = report_directions(cns_model.spec, wk.FrequencyLattice(2, 2), extra=16)
    axes = np.eye(2)
    for axis in axes:
        assert any(np.allclose(d, axis) for d in dirs)
    norms = np.linalg.norm(dirs, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-12)
