"""Acceptance suite: one test per criterion, each printing its pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines as they complete.  Tolerances and runtime budgets are pinned here.
"""

import math
import time

import numpy as np
import pytest

import wndkit as wk
from wndkit.averaging import averaged_diffusion_oracle, cyclic_residual
from wndkit.dissipativity import criterion_beta, constructive_delta, sphere_constants
from wndkit.navier_stokes import acoustic_sum_resonant, simulate_incompressible_reference, wcns_split

from conftest import state_diff_norm


def report(num, name, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {num:2d}: {name}  {detail}")
    assert ok, f"criterion {num} ({name}) failed: {detail}"


@pytest.fixture(scope="module")
def wave2_ops(wave2_spec):
    return wk.build_operators(wave2_spec, wk.FrequencyLattice(1, 4), with_quadratic=False)


def test_criterion_01_entropy_validation(cns_model):
    start = time.perf_counter()
    rep = wk.validate_entropy_structure(cns_model.spec)
    elapsed = time.perf_counter() - start
    ok = (
        rep.passed
        and rep.max_asymmetry <= 1e-10
        and rep.min_diffusion_eigenvalue >= -1e-10
        and elapsed < 1.0
    )
    report(1, "entropy-structure validation",
           ok, f"asym={rep.max_asymmetry:.2e} neg={rep.min_diffusion_eigenvalue:.2e} t={elapsed:.2f}s")


def test_criterion_02_diffusion_oracle(wave2_spec, wave2_ops, cns_model, cns_ops8):
    start = time.perf_counter()
    worst_exact = 0.0
    for xi in (1, 2, 3):
        blk = wave2_ops.avg.block((xi,))
        worst_exact = max(worst_exact, float(np.abs(blk - (-0.5 * xi**2) * np.eye(2)).max()))
    oracle = averaged_diffusion_oracle(wave2_spec, [1.0], t_span=1e4, n_steps=10**6)
    wave_err = float(np.abs(oracle - (-0.5) * np.eye(2)).max())
    cns_err = 0.0
    for mode in [(1, 0), (2, 1), (0, 3), (2, 2), (1, -2)]:
        orc = averaged_diffusion_oracle(cns_model.spec, np.asarray(mode, float), 1e4, 400000)
        cns_err = max(cns_err, float(np.abs(orc - cns_ops8.avg.block(mode)).max()))
    elapsed = time.perf_counter() - start
    ok = worst_exact <= 1e-12 and wave_err <= 1e-3 and cns_err <= 1e-3 and elapsed < 30.0
    report(2, "averaged-diffusion oracle equivalence", ok,
           f"exact={worst_exact:.2e} oracle2x2={wave_err:.2e} cns={cns_err:.2e} t={elapsed:.1f}s")


def test_criterion_03_cyclic_identity(cns_model, cns_ops4):
    start = time.perf_counter()
    lat = cns_ops4.lattice
    worst = 0.0
    for trial in range(20):
        states = [
            wk.random_real_state(lat, 4, seed=300 + 3 * trial + j, decay=2.0) for j in range(3)
        ]
        worst = max(worst, cyclic_residual(cns_model.spec, cns_ops4.spectrum, cns_ops4.table, *states))
    w = wk.random_real_state(lat, 4, seed=999, decay=2.0)
    self_res = cyclic_residual(cns_model.spec, cns_ops4.spectrum, cns_ops4.table, w, w, w)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-10 and self_res <= 1e-10 and elapsed < 60.0
    report(3, "cyclic identity", ok, f"max={worst:.2e} self={self_res:.2e} t={elapsed:.1f}s")


def test_criterion_04_equivariance(cns_model, cns_ops4):
    spec = cns_model.spec
    lat = cns_ops4.lattice
    rng = np.random.Generator(np.random.Philox(key=44))
    worst_q = worst_d = 0.0
    for trial in range(10):
        t = float(rng.uniform(-5.0, 5.0))
        w1 = wk.random_real_state(lat, 4, seed=400 + 2 * trial, decay=2.5)
        w2 = wk.random_real_state(lat, 4, seed=401 + 2 * trial, decay=2.5)
        e1 = wk.evolve_state(cns_ops4.spectrum, t, w1)
        e2 = wk.evolve_state(cns_ops4.spectrum, t, w2)
        lhs = wk.apply_averaged_quadratic(spec, cns_ops4.spectrum, cns_ops4.table, e1, e2)
        rhs = wk.evolve_state(
            cns_ops4.spectrum, t,
            wk.apply_averaged_quadratic(spec, cns_ops4.spectrum, cns_ops4.table, w1, w2),
        )
        scale = max(np.abs(rhs.coeffs).max(), 1e-30)
        worst_q = max(worst_q, float(np.abs(lhs.coeffs - rhs.coeffs).max() / scale))
        dl = wk.apply_averaged_diffusion(cns_ops4.avg, e1)
        dr = wk.evolve_state(cns_ops4.spectrum, t, wk.apply_averaged_diffusion(cns_ops4.avg, w1))
        scale_d = max(np.abs(dr.coeffs).max(), 1e-30)
        worst_d = max(worst_d, float(np.abs(dl.coeffs - dr.coeffs).max() / scale_d))
    ok = worst_q <= 1e-10 and worst_d <= 1e-10
    report(4, "group equivariance of averaged operators", ok,
           f"quadratic={worst_q:.2e} diffusion={worst_d:.2e}")


def test_criterion_05_strict_dissipativity(wave2_spec, wave2_ops, cns_model, cns_ops8):
    dirs = np.array([[1.0], [-1.0]])
    beta = criterion_beta(wave2_spec, 1.0, dirs)
    c_adv, c_diff = sphere_constants(wave2_spec, dirs)
    epsilon, delta = constructive_delta(1.0, beta, c_adv, c_diff)
    emp = wk.verify_delta(wave2_spec, wave2_ops.avg)
    ok_wave = (
        abs(beta - 1.0) <= 1e-12
        and abs(epsilon - 0.125) <= 1e-12
        and abs(delta - 1.0 / 24.0) <= 1e-12
        and abs(emp - 0.5) <= 1e-9
        and delta <= emp + 1e-9
    )
    rep = wk.analyze_dissipativity(cns_model.spec, cns_ops8.lattice, cns_ops8.avg)
    ok_cns = rep.criterion_ok and rep.delta > 0.0 and rep.delta_empirical >= rep.delta - 1e-9
    report(5, "strict-dissipativity certificate", ok_wave and ok_cns,
           f"wave: beta={beta:.3g} delta={delta:.6g} emp={emp:.3g}; "
           f"cns: delta={rep.delta:.3e} emp={rep.delta_empirical:.3e}")


def test_criterion_06_closed_form_constants():
    eos = wk.ideal_gas(3)
    transport = wk.TransportCoefficients(shear=1.0, bulk=0.0, thermal=1.0, micro_dim=3)
    c_sq = wk.sound_speed(eos, 1.0, 1.0) ** 2
    nu = wk.acoustic_diffusivity(eos, transport, 1.0, 1.0)
    ok = abs(c_sq - 5.0 / 3.0) <= 1e-14 * (5.0 / 3.0) and abs(nu - 0.8) <= 1e-14 * 0.8
    report(6, "closed-form sound speed and acoustic diffusivity", ok,
           f"c0^2={c_sq!r} nu_bar={nu!r}")


def test_criterion_07_energy_identity(cns_model, cns_ops8):
    w0 = wk.random_real_state(cns_ops8.lattice, 4, seed=777, decay=3.0, amplitude=0.2)
    start = time.perf_counter()
    snaps, series = wk.simulate(
        cns_ops8, w0, t_end=5.0, dt=1e-3, method="if_rk4", diagnostics_every=100
    )
    elapsed = time.perf_counter() - start
    per_unit = np.abs(series.budget_residual[1:]) / np.maximum(series.times[1:], 1.0)
    monotone = bool(np.all(np.diff(series.energy) <= 1e-12))
    ok = per_unit.max() <= 1e-6 and monotone and elapsed < 300.0
    report(7, "discrete energy identity", ok,
           f"budget/t={per_unit.max():.2e} monotone={monotone} t={elapsed:.0f}s")


def test_criterion_08_filtered_equivalence(cns_model, cns_ops4):
    w0 = wk.random_real_state(cns_ops4.lattice, 4, seed=808, decay=3.0, amplitude=0.2)
    defect = wk.filtered_equivalence_check(cns_ops4, w0, t_end=1.0, dt=1e-3, diagnostics_every=100)
    ok = defect <= 1e-6
    report(8, "filtered-variable equivalence", ok, f"defect={defect:.2e}")


def test_criterion_09_wcns_structure(cns_model, cns_ops8):
    lat = cns_ops8.lattice
    state = wk.random_real_state(lat, 4, seed=909, decay=3.0, amplitude=0.2)
    w_in0, _ = wcns_split(cns_model, cns_ops8.spectrum, state)
    snaps, _ = wk.simulate(cns_ops8, w_in0, t_end=1.0, dt=1e-3, diagnostics_every=200)
    leak = 0.0
    for snap in snaps:
        _, w_ac = wcns_split(cns_model, cns_ops8.spectrum, snap)
        leak = max(leak, wk.energy_norm(cns_model.spec, w_ac))
    leak /= wk.energy_norm(cns_model.spec, w_in0)

    u_final, th_final = simulate_incompressible_reference(
        cns_model, lat, w_in0.coeffs[:, 1:3], w_in0.coeffs[:, 3], 1.0, 1e-3
    )
    ref = wk.zero_state(lat, 4)
    ref.coeffs[:, 1:3] = u_final
    ref.coeffs[:, 3] = th_final
    ref.coeffs[:, 0] = -cns_model.p_theta / cns_model.p_rho * th_final
    match = state_diff_norm(cns_model.spec, snaps[-1], ref) / wk.energy_norm(cns_model.spec, ref)

    lin_ops = wk.build_operators(cns_model.spec, wk.FrequencyLattice(2, 3), with_quadratic=False)
    decay_err = 0.0
    for k in [(1, 0), (1, 1), (2, -1)]:
        hp, _ = wk.acoustic_basis(cns_model, k)
        amp = 0.01
        single = wk.state_from_modes(lin_ops.lattice, 4, [(k, amp * hp.astype(complex))])
        lsnaps, _ = wk.simulate(lin_ops, single, t_end=0.5, dt=0.01, diagnostics_every=10**9)
        ksq = float(np.dot(k, k))
        expect = amp * np.exp((-1j * cns_model.sound * math.sqrt(ksq) - cns_model.diffusivity * ksq) * 0.5)
        got = lsnaps[-1].coeff(k) @ cns_model.spec.entropy_hessian @ hp
        decay_err = max(decay_err, abs(got - expect) / abs(expect))
    ok = leak <= 1e-10 and match <= 1e-6 and decay_err <= 1e-9
    report(9, "weakly compressible split structure", ok,
           f"acoustic leak={leak:.2e} incompressible match={match:.2e} decay err={decay_err:.2e}")


def test_criterion_10_weak_strong(cns_model, cns_ops4):
    u1 = wk.random_real_state(cns_ops4.lattice, 4, seed=1010, decay=4.0, amplitude=0.5)
    same = wk.weak_strong_experiment(cns_ops4, u1, u1.copy(), t_end=1.0, dt=1e-3, s=2.0)
    bump = wk.state_from_modes(
        cns_ops4.lattice, 4, [((4, 3), 1e-6 * np.array([1.0, 0.5, -0.2, 0.3], dtype=complex))]
    )
    pert = u1.copy()
    pert.coeffs = pert.coeffs + bump.coeffs
    two = wk.weak_strong_experiment(cns_ops4, u1, pert, t_end=1.0, dt=1e-3, s=2.0)
    ok = (
        same.max_difference <= 1e-10
        and two.envelope_ok
        and two.energy_equality_defect <= 1e-8
    )
    report(10, "weak-strong stability behavior", ok,
           f"identical={same.max_difference:.2e} envelope_ok={two.envelope_ok} "
           f"energy defect={two.energy_equality_defect:.2e}")


def test_criterion_11_exact_resonance_rule(cns_model):
    start = time.perf_counter()
    c0 = cns_model.sound
    span = range(-8, 9)
    scale = c0 * math.sqrt(2.0) * 8.0 * 3.0
    mismatches = 0
    checked = 0
    sqrt_cache = {n: math.sqrt(n) for n in range(0, 2 * (2 * 8) ** 2 + 1)}
    for k1 in span:
        for k2 in span:
            a = k1 * k1 + k2 * k2
            for l1 in span:
                for l2 in span:
                    b = l1 * l1 + l2 * l2
                    c = (k1 + l1) ** 2 + (k2 + l2) ** 2
                    s1_opts = (0,) if a == 0 else (-1, 0, 1)
                    s2_opts = (0,) if b == 0 else (-1, 0, 1)
                    s3_opts = (0,) if c == 0 else (-1, 0, 1)
                    for s1 in s1_opts:
                        for s2 in s2_opts:
                            for s3 in s3_opts:
                                lhs = s1 * sqrt_cache[a] + s2 * sqrt_cache[b] - s3 * sqrt_cache[c]
                                float_hit = abs(c0 * lhs) <= 1e-9 * scale
                                exact_hit = acoustic_sum_resonant(a, b, c, s1, s2, s3)
                                checked += 1
                                mismatches += float_hit != exact_hit
    near_miss_accepted = 0
    for m in range(20, 60):
        a, b, c = m, m + 1, 4 * m + 2
        defect = abs(math.sqrt(a) + math.sqrt(b) - math.sqrt(c))
        if defect <= 1e-3 and acoustic_sum_resonant(a, b, c, 1, 1, 1):
            near_miss_accepted += 1
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and near_miss_accepted == 0 and elapsed < 60.0
    report(11, "exact acoustic resonance rule", ok,
           f"checked={checked} mismatches={mismatches} near-misses accepted={near_miss_accepted} "
           f"t={elapsed:.0f}s")


def test_criterion_12_change_of_variables_covariance(cns_model):
    conserved = wk.build_cns_spec(
        cns_model.eos, cns_model.transport, 1.0, 1.0, 2, variables="conserved"
    )
    lat = wk.FrequencyLattice(2, 2)
    rule = wk.make_exact_resonance_rule(cns_model)
    prim = wk.build_operators(cns_model.spec, lat, exact_rule=rule)
    cons = wk.build_operators(conserved, lat, exact_rule=rule)
    to_prim = np.linalg.inv(cns_model.conserved_jacobian)
    worst_adv = worst_diff = 0.0
    for i, mode in enumerate(lat):
        adv_c = wk.advection_symbol(conserved, np.asarray(mode, float))
        adv_p = wk.advection_symbol(cns_model.spec, np.asarray(mode, float))
        expect = np.linalg.inv(to_prim) @ adv_p @ to_prim
        scale = max(1.0, np.abs(expect).max())
        worst_adv = max(worst_adv, float(np.abs(adv_c - expect).max() / scale))
        expect_d = np.linalg.inv(to_prim) @ prim.avg.blocks[i] @ to_prim
        scale_d = max(1.0, np.abs(expect_d).max())
        worst_diff = max(worst_diff, float(np.abs(cons.avg.blocks[i] - expect_d).max() / scale_d))
    wq = wk.random_real_state(lat, 4, seed=5, decay=2.0)
    w_prim = wq.copy()
    w_prim.coeffs = wq.coeffs @ to_prim.T
    out_p = wk.apply_averaged_quadratic(cns_model.spec, prim.spectrum, prim.table, w_prim, w_prim)
    out_c = wk.apply_averaged_quadratic(conserved, cons.spectrum, cons.table, wq, wq)
    pulled = out_p.coeffs @ np.linalg.inv(to_prim).T
    worst_q = float(np.abs(out_c.coeffs - pulled).max() / max(1.0, np.abs(pulled).max()))
    ok = worst_adv <= 1e-9 and worst_diff <= 1e-9 and worst_q <= 1e-9
    report(12, "primitive/conserved covariance", ok,
           f"advection={worst_adv:.2e} diffusion={worst_diff:.2e} quadratic={worst_q:.2e}")
