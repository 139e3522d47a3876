import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import wndkit as wk
from wndkit.spectral import FrequencyLattice, decompose, evolve_group, frequency_spectrum


def test_lattice_negation_closure_and_order():
    lat = FrequencyLattice(2, 2)
    assert len(lat) == 25
    for i, mode in enumerate(lat):
        neg = tuple(-c for c in mode)
        assert lat.modes[lat.negation[i]] == neg
        assert lat.index(mode) == i
    assert list(lat)[:3] == [(-2, -2), (-2, -1), (-2, 0)]  # lexicographic


def test_lattice_rejects_outside_mode():
    lat = FrequencyLattice(2, 1)
    with pytest.raises(KeyError):
        lat.index((2, 0))


def test_decompose_zero_mode(cns_model):
    dec = decompose(cns_model.spec, (0, 0))
    assert dec.nfreq == 1
    assert dec.frequencies[0] == 0.0
    assert np.array_equal(dec.projectors[0], np.eye(4))


def test_decompose_wave_pair(wave2_spec):
    dec = decompose(wave2_spec, (1,))
    assert np.allclose(sorted(dec.frequencies), [-1.0, 1.0])
    minus = dec.projectors[np.argmin(dec.frequencies)]
    plus = dec.projectors[np.argmax(dec.frequencies)]
    assert np.allclose(plus, 0.5 * np.array([[1, 1], [1, 1]]), atol=1e-12)
    assert np.allclose(minus, 0.5 * np.array([[1, -1], [-1, 1]]), atol=1e-12)


def test_decompose_cns_three_branches(cns_model):
    c0 = cns_model.sound
    for mode in [(1, 0), (2, 1), (-3, 4)]:
        dec = decompose(cns_model.spec, mode)
        assert dec.nfreq == 3
        norm = np.linalg.norm(mode)
        assert np.allclose(sorted(dec.frequencies), [-c0 * norm, 0.0, c0 * norm], atol=1e-9)
        null_dim = round(float(np.trace(dec.projectors[1])))
        assert null_dim == 2


def test_mode_decomposition_invariants(cns_model):
    spec = cns_model.spec
    g = spec.entropy_hessian
    for mode in [(1, 0), (0, 2), (3, -1), (2, 2)]:
        dec = decompose(spec, mode)
        total = dec.projectors.sum(axis=0)
        assert np.abs(total - np.eye(4)).max() <= 1e-12
        for j, pj in enumerate(dec.projectors):
            assert np.abs(pj.T @ g - g @ pj).max() <= 1e-11
            for k, pk in enumerate(dec.projectors):
                expect = pj if j == k else np.zeros((4, 4))
                assert np.abs(pj @ pk - expect).max() <= 1e-11
        rebuilt = np.einsum("j,jpq->pq", dec.frequencies, dec.projectors)
        target = wk.advection_symbol(spec, np.asarray(mode, dtype=float))
        assert np.abs(rebuilt - target).max() <= 1e-11 * max(1.0, np.abs(target).max())


def test_evolve_group_identity_and_closed_form(wave2_spec):
    dec = decompose(wave2_spec, (1,))
    v = np.array([1.0, 0.0])
    assert np.allclose(evolve_group(dec, 0.0, v), v)
    out = evolve_group(dec, np.pi / 2.0, v)
    assert np.allclose(out, [0.0, -1.0j], atol=1e-12)


@given(st.floats(-50, 50), st.floats(-50, 50))
@settings(max_examples=40, deadline=None)
def test_evolve_group_law(t, s):
    model = wk.build_preset("ideal-gas-2d")
    dec = decompose(model.spec, (2, 1))
    v = np.array([0.3, -0.2, 0.5, 0.1], dtype=complex)
    once = evolve_group(dec, t, evolve_group(dec, s, v))
    combined = evolve_group(dec, t + s, v)
    assert np.abs(once - combined).max() <= 1e-12 * max(1.0, np.abs(combined).max())


def test_evolve_group_isometry(cns_model):
    g = cns_model.spec.entropy_hessian
    dec = decompose(cns_model.spec, (3, -2))
    rng = np.random.Generator(np.random.Philox(key=8))
    v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    ref = np.sqrt((v.conj() @ g @ v).real)
    for t in (-1e3, -1.7, 0.33, 250.0, 1e3):
        out = evolve_group(dec, t, v)
        assert np.sqrt((out.conj() @ g @ out).real) == pytest.approx(ref, rel=1e-12)


def test_frequency_spectrum_radius_zero(cns_model):
    lat = FrequencyLattice(2, 0)
    spectrum = frequency_spectrum(cns_model.spec, lat)
    assert list(spectrum) == [(0, 0)]


def test_frequency_spectrum_scalar_advection():
    spec = wk.SystemSpec(1, 1, [0.0], [[[1.0]]], [[[[0.0]]]], [[[[0.0]]]], [[1.0]])
    spectrum = frequency_spectrum(spec, FrequencyLattice(1, 2))
    freqs = sorted(dec.frequencies[0] for dec in spectrum.values())
    assert np.allclose(freqs, [-2, -1, 0, 1, 2])


def test_frequency_spectrum_cns_branch_count(cns_ops4):
    for mode, dec in cns_ops4.spectrum.items():
        expected = 1 if mode == (0, 0) else 3
        assert dec.nfreq == expected


def test_reality_pairing(cns_model):
    for mode in [(1, 0), (2, -1), (3, 3)]:
        dec_p = decompose(cns_model.spec, mode)
        dec_m = decompose(cns_model.spec, tuple(-c for c in mode))
        assert np.allclose(sorted(dec_m.frequencies), sorted(-dec_p.frequencies), atol=1e-11)
        for j, freq in enumerate(dec_p.frequencies):
            match = np.argmin(np.abs(dec_m.frequencies + freq))
            assert np.abs(dec_m.projectors[match] - dec_p.projectors[j].conj()).max() <= 1e-11


def test_conjugation_covariance(cns_model):
    rng = np.random.Generator(np.random.Philox(key=12))
    transform = np.eye(4) + 0.2 * rng.standard_normal((4, 4))
    primed = wk.change_of_variables(cns_model.spec, transform)
    for mode in [(1, 0), (2, 1)]:
        dec = decompose(cns_model.spec, mode)
        dec_p = decompose(primed, mode)
        assert np.allclose(sorted(dec.frequencies), sorted(dec_p.frequencies), atol=1e-10)
        inv = np.linalg.inv(transform)
        for j, freq in enumerate(dec.frequencies):
            match = np.argmin(np.abs(dec_p.frequencies - freq))
            conjugated = inv @ dec.projectors[j] @ transform
            scale = max(1.0, np.abs(conjugated).max())
            assert np.abs(dec_p.projectors[match] - conjugated).max() <= 1e-9 * scale


def test_spectrum_csv_rows(cns_ops4):
    rows = list(wk.spectral.spectrum_csv_rows(cns_ops4.spectrum))
    assert len(rows) == sum(d.nfreq for d in cns_ops4.spectrum.values())
    assert all(len(r) == 5 for r in rows)  # 2 mode components, index, omega, rank
