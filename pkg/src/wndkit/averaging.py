"""Resonance-averaged diffusion and quadratic operators.

Long-time averaging of an operator conjugated by the unitary group
e^{-t A} keeps exactly the interactions whose frequencies cancel.  Per
mode, with spectral projectors p_j(xi) of the advection symbol:

    averaged diffusion   dbar(xi) = - sum_j p_j(xi) b(xi) p_j(xi)

    averaged quadratic   output at m = k + l accumulates
        p_j3(m) . (i m . q)( p_j1(k) w1(k), p_j2(l) w2(l) )
        over all triples with omega_j1(k) + omega_j2(l) = omega_j3(m).

The sign convention makes dbar the dissipative right-hand side: g dbar(xi)
is Hermitian nonpositive.  Both operators commute with the group action,
and the entropy structure gives the quadratic operator the cyclic identity

    (w1 | qbar(w2,w3)) + (w2 | qbar(w3,w1)) + (w3 | qbar(w1,w2)) = 0,

which is what makes the nonlinearity energy neutral.

Resonance detection is the main correctness hazard: by default frequency
sums are matched with a relative tolerance, and callers with arithmetic
structure (the gas-dynamics instantiation) supply an exact predicate
instead.  Output modes falling outside the truncation are dropped, i.e. the
sum is composed with the Galerkin projection onto the retained modes.

Brute-force time-average oracles for both operators are provided; they use
matrix-exponential propagator powers and trapezoidal quadrature, sharing no
code with the spectral formulas they check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Mapping

import numpy as np
import scipy.linalg

from .spectral import FrequencyLattice, Mode, ModeDecomposition
from .state import SpectralState, energy_norm, inner_product, is_reality_symmetric
from .system import SystemSpec, advection_symbol, diffusion_symbol

__all__ = [
    "AveragedDiffusion",
    "ResonanceTable",
    "averaged_diffusion",
    "apply_averaged_diffusion",
    "averaged_diffusion_oracle",
    "build_resonance_table",
    "apply_averaged_quadratic",
    "apply_quadratic",
    "quadratic_time_average_oracle",
    "cyclic_residual",
    "resonance_csv_rows",
    "diffusion_csv_rows",
]

ExactRule = Callable[[Mode, float, Mode, float, Mode, float], bool]


@dataclass(eq=False)
class AveragedDiffusion:
    """Per-mode blocks of the averaged diffusion operator, in lattice order."""

    lattice: FrequencyLattice
    blocks: np.ndarray  # (nmodes, N, N) complex

    def block(self, mode) -> np.ndarray:
        return self.blocks[self.lattice.index(mode)]


def averaged_diffusion(
    spec: SystemSpec,
    spectrum: Mapping[Mode, ModeDecomposition],
    lattice: FrequencyLattice,
) -> AveragedDiffusion:
    """dbar(xi) = - sum_j p_j(xi) b(xi) p_j(xi) for every lattice mode."""
    n = spec.ncomp
    blocks = np.zeros((len(lattice), n, n), dtype=complex)
    for i, mode in enumerate(lattice):
        dec = spectrum.get(mode)
        if dec is None:
            raise KeyError(f"spectrum is missing mode {mode}")
        if not any(mode):
            continue  # diffusion symbol vanishes at the zero mode
        bsym = diffusion_symbol(spec, np.asarray(mode, dtype=float))
        blocks[i] = -np.einsum("jpq,qr,jrs->ps", dec.projectors, bsym, dec.projectors)
    # the identity dbar(-xi) = conj(dbar(xi)) holds exactly for real symbols;
    # enforcing it removes independent-eigensolve roundoff so that stepping
    # preserves the reality symmetry of states bit for bit
    neg = lattice.negation
    upper = np.arange(len(lattice)) > lattice.zero_index()
    blocks[neg[upper]] = blocks[upper].conj()
    return AveragedDiffusion(lattice=lattice, blocks=blocks)


def apply_averaged_diffusion(avg: AveragedDiffusion, state: SpectralState) -> SpectralState:
    out = state.copy()
    out.coeffs = np.einsum("mpq,mq->mp", avg.blocks, state.coeffs)
    return out


def _propagator_powers(step: np.ndarray, count: int, chunk: int) -> Iterator[np.ndarray]:
    """Yield blocks [step^j for j in j0..j0+len) by repeated batched doubling."""
    n = step.shape[0]
    block = np.empty((min(chunk, count), n, n), dtype=complex)
    block[0] = np.eye(n)
    size = 1
    while size < block.shape[0]:
        take = min(size, block.shape[0] - size)
        block[size : size + take] = block[size - 1] @ step @ block[:take]
        size += take
    carry = np.eye(n, dtype=complex)
    stride = block[-1] @ step
    done = 0
    while done < count:
        take = min(block.shape[0], count - done)
        yield carry @ block[:take]
        carry = carry @ stride
        done += take


def averaged_diffusion_oracle(
    spec: SystemSpec,
    xi,
    t_span: float,
    n_steps: int,
    chunk: int = 32768,
) -> np.ndarray:
    """Trapezoidal time average of e^{i t a(xi)} (-b(xi)) e^{-i t a(xi)} on [-T, T].

    Independent of the projector route: the propagator comes from one scipy
    matrix exponential extended by batched powers; n_steps nodes cover each
    half-axis.  Converges to the averaged-diffusion block at rate O(1/T)
    (quasi-periodic integrand).
    """
    if t_span <= 0.0 or n_steps < 100:
        raise ValueError("need t_span > 0 and n_steps >= 100")
    xi = np.asarray(xi, dtype=float)
    a = advection_symbol(spec, xi)
    b = diffusion_symbol(spec, xi).astype(complex)
    dt = t_span / n_steps
    acc = np.zeros_like(b)
    # e^{-i t a} = conj(e^{i t a}) for the real symbol a, so each half-axis
    # needs a single power stream; the halves share the t = 0 node, whose two
    # endpoint half-weights combine to the interior trapezoid weight.
    for sign in (1.0, -1.0):
        step = scipy.linalg.expm(sign * 1j * dt * a)
        offset = 0
        for fwd in _propagator_powers(step, n_steps + 1, chunk):
            weights = np.full(fwd.shape[0], dt)
            if offset == 0:
                weights[0] = 0.5 * dt
            if offset + fwd.shape[0] == n_steps + 1:
                weights[-1] = 0.5 * dt
            integrand = np.einsum("tpq,qr,trs->tps", fwd, -b, fwd.conj())
            acc += np.einsum("t,tpq->pq", weights, integrand)
            offset += fwd.shape[0]
    return acc / (2.0 * t_span)


@dataclass(eq=False)
class ResonanceTable:
    """Resonant frequency triples (k, j1; l, j2; m=k+l, j3) on one lattice.

    `entries` columns: k index, j1, l index, j2, m index, j3.  `defects`
    stores the measured frequency mismatch omega1 + omega2 - omega3 (pure
    eigensolve noise for entries admitted by an exact rule).  Symmetric: the
    (l, k) mirror of every entry is present.
    """

    lattice: FrequencyLattice
    entries: np.ndarray  # (T, 6) int64
    defects: np.ndarray  # (T,) float
    tolerance: float
    exact: bool

    def __len__(self) -> int:
        return self.entries.shape[0]

    def __post_init__(self) -> None:
        self._compiled: dict = {}


def build_resonance_table(
    spectrum: Mapping[Mode, ModeDecomposition],
    lattice: FrequencyLattice,
    tol: float = 1e-9,
    exact_rule: ExactRule | None = None,
) -> ResonanceTable:
    """Enumerate all resonant triples with k, l and k+l inside the lattice.

    Generic detection accepts |omega1 + omega2 - omega3| <= tol * scale with
    scale the largest frequency magnitude on the lattice; floating-point
    near-resonances are the dominant hazard, so callers should pass an
    exact_rule whenever the spectrum has arithmetic structure.
    """
    modes = list(lattice)
    decs = [spectrum[m] for m in modes]
    freqs = [d.frequencies for d in decs]
    scale = max((float(np.abs(f).max()) for f in freqs), default=1.0)
    scale = max(scale, 1.0)
    arr = lattice.array
    rows: list[tuple[int, int, int, int, int, int]] = []
    defects: list[float] = []
    for ki, kmode in enumerate(modes):
        ksum = arr + arr[ki]  # candidate m = k + l for every l
        inside = np.abs(ksum).max(axis=1) <= lattice.radius
        for li in np.flatnonzero(inside):
            mi = int(lattice.index_array(ksum[li]))
            f1, f2, f3 = freqs[ki], freqs[li], freqs[mi]
            for j1, w1 in enumerate(f1):
                for j2, w2 in enumerate(f2):
                    target = w1 + w2
                    for j3, w3 in enumerate(f3):
                        if exact_rule is not None:
                            hit = exact_rule(modes[ki], w1, modes[li], w2, modes[mi], w3)
                        else:
                            hit = abs(target - w3) <= tol * scale
                        if hit:
                            rows.append((ki, j1, li, j2, mi, j3))
                            defects.append(target - w3)
    entries = np.asarray(rows, dtype=np.int64).reshape(-1, 6)
    return ResonanceTable(
        lattice=lattice,
        entries=entries,
        defects=np.asarray(defects, dtype=float),
        tolerance=tol,
        exact=exact_rule is not None,
    )


class _CompiledQuadratic:
    """Half-table kernels for fast application of the averaged quadratic form.

    Entries whose output mode m is the zero mode contribute nothing (the
    divergence factor i*m vanishes) and are dropped.  Of the remainder only
    triples with m in the lexicographically positive half are compiled; for
    reality-symmetric inputs the negative-half output is the mirrored
    conjugate, and general complex inputs are handled by splitting each
    argument into two reality-symmetric parts (the operator is bilinear).
    """

    def __init__(
        self,
        spec: SystemSpec,
        spectrum: Mapping[Mode, ModeDecomposition],
        table: ResonanceTable,
    ) -> None:
        lattice = table.lattice
        n = spec.ncomp
        self.lattice = lattice
        self.ncomp = n
        zero_idx = lattice.zero_index()
        entries = table.entries
        keep = entries[:, 4] > zero_idx  # positive half in lex order: index above the zero mode
        entries = entries[keep]
        order = np.argsort(entries[:, 4], kind="stable")
        entries = entries[order]
        self.idx_k = entries[:, 0].copy()
        self.idx_l = entries[:, 2].copy()
        idx_m = entries[:, 4]
        self.seg_starts = np.flatnonzero(np.r_[True, np.diff(idx_m) > 0]) if len(entries) else np.zeros(0, np.int64)
        self.seg_modes = idx_m[self.seg_starts] if len(entries) else np.zeros(0, np.int64)

        modes_arr = lattice.array.astype(float)
        max_branches = max(spectrum[mode].nfreq for mode in lattice)
        pstack = np.zeros((len(lattice), max_branches, n, n))
        for i, mode in enumerate(lattice):
            dec = spectrum[mode]
            pstack[i, : dec.nfreq] = dec.projectors
        p_out = pstack[entries[:, 4], entries[:, 5]]
        p_in1 = pstack[entries[:, 0], entries[:, 1]]
        p_in2 = pstack[entries[:, 2], entries[:, 3]]
        div = 1j * np.einsum("ta,aijk->tijk", modes_arr[entries[:, 4]], spec.quadratic)
        kernels = np.einsum("tpi,tijk,tjb,tkc->tpbc", p_out, div, p_in1, p_in2, optimize=True)
        self.kernels = np.ascontiguousarray(kernels.reshape(len(entries), n, n * n))

    def _half_apply(self, c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
        """Accumulate positive-half outputs for reality-symmetric coefficient arrays."""
        m = len(self.lattice)
        out = np.zeros((m, self.ncomp), dtype=complex)
        if len(self.idx_k) == 0:
            return out
        v1 = c1[self.idx_k]
        v2 = c2[self.idx_l]
        pair = (v1[:, :, None] * v2[:, None, :]).reshape(len(v1), -1)
        contrib = np.matmul(self.kernels, pair[:, :, None])[:, :, 0]
        sums = np.add.reduceat(contrib, self.seg_starts, axis=0)
        out[self.seg_modes] = sums
        neg = self.lattice.negation
        out[neg[self.seg_modes]] = sums.conj()
        return out

    def apply(self, w1: SpectralState, w2: SpectralState) -> SpectralState:
        out = w1.copy()
        out.time = w1.time
        real1 = is_reality_symmetric(w1)
        real2 = is_reality_symmetric(w2)
        if real1 and real2:
            out.coeffs = self._half_apply(w1.coeffs, w2.coeffs)
            return out
        neg = self.lattice.negation
        parts = []
        for state, already_real in ((w1, real1), (w2, real2)):
            if already_real:
                parts.append((state.coeffs, None))
            else:
                sym = 0.5 * (state.coeffs + state.coeffs[neg].conj())
                anti = (state.coeffs - state.coeffs[neg].conj()) / 2j
                parts.append((sym, anti))
        (a_sym, a_anti), (b_sym, b_anti) = parts
        acc = self._half_apply(a_sym, b_sym)
        if b_anti is not None:
            acc = acc + 1j * self._half_apply(a_sym, b_anti)
        if a_anti is not None:
            acc = acc + 1j * self._half_apply(a_anti, b_sym)
            if b_anti is not None:
                acc = acc - self._half_apply(a_anti, b_anti)
        out.coeffs = acc
        return out


def _compiled(spec: SystemSpec, spectrum, table: ResonanceTable) -> _CompiledQuadratic:
    # key on identity but keep the spec alive in the entry, so a recycled id
    # can never serve another spec's kernels
    cached = table._compiled.get(id(spec))
    if cached is None or cached[0] is not spec:
        cached = (spec, _CompiledQuadratic(spec, spectrum, table))
        table._compiled[id(spec)] = cached
    return cached[1]


def apply_averaged_quadratic(
    spec: SystemSpec,
    spectrum: Mapping[Mode, ModeDecomposition],
    table: ResonanceTable,
    w1: SpectralState,
    w2: SpectralState,
) -> SpectralState:
    """qbar(w1, w2): resonant projected interactions accumulated at m = k + l.

    Symmetric in its arguments (the kernel is symmetric and the table stores
    both orderings of every pair); preserves reality symmetry.
    """
    if w1.lattice.modes != table.lattice.modes or w2.lattice.modes != table.lattice.modes:
        raise ValueError("states and resonance table live on different lattices")
    return _compiled(spec, spectrum, table).apply(w1, w2)


def apply_quadratic(spec: SystemSpec, w1: SpectralState, w2: SpectralState) -> SpectralState:
    """Unaveraged quadratic operator: the plain truncated convolution

        out(m) = sum_{k+l=m} (i m . q)(w1(k), w2(l)),

    by direct pair summation (no FFT, hence no aliasing ambiguity).  Used as
    the all-resonant oracle and inside the time-average oracle.
    """
    lattice = w1.lattice
    if w2.lattice.modes != lattice.modes:
        raise ValueError("states live on different lattices")
    arr = lattice.array
    m = len(lattice)
    out = w1.copy()
    out.coeffs = np.zeros_like(w1.coeffs)
    sym_q = spec.quadratic
    for ki in range(m):
        ksum = arr + arr[ki]
        inside = np.abs(ksum).max(axis=1) <= lattice.radius
        li = np.flatnonzero(inside)
        if li.size == 0:
            continue
        mi = lattice.index_array(ksum[li])
        quad = np.einsum("aijk,j,tk->tai", sym_q, w1.coeffs[ki], w2.coeffs[li])
        div = 1j * np.einsum("ta,tai->ti", arr[mi].astype(float), quad)
        np.add.at(out.coeffs, mi, div)
    return out


def quadratic_time_average_oracle(
    spec: SystemSpec,
    state: SpectralState,
    t_span: float,
    n_steps: int,
    chunk: int = 2048,
) -> SpectralState:
    """Trapezoidal average of e^{t A} Q(e^{-t A} w, e^{-t A} w) over [-T, T].

    Propagators are scipy matrix exponentials extended by batched powers;
    the convolution is the unaveraged operator.  Converges O(1/T) to the
    averaged quadratic form on the same state.
    """
    if t_span <= 0.0 or n_steps < 100:
        raise ValueError("need t_span > 0 and n_steps >= 100")
    lattice = state.lattice
    arr = lattice.array.astype(float)
    nmodes = len(lattice)
    n = spec.ncomp
    dt = t_span / n_steps
    steps = np.empty((nmodes, n, n), dtype=complex)
    for i in range(nmodes):
        steps[i] = scipy.linalg.expm(-1j * dt * advection_symbol(spec, arr[i]))

    pairs_k: list[np.ndarray] = []
    pairs_l: list[np.ndarray] = []
    pairs_m: list[np.ndarray] = []
    for ki in range(nmodes):
        ksum = lattice.array + lattice.array[ki]
        inside = np.abs(ksum).max(axis=1) <= lattice.radius
        li = np.flatnonzero(inside)
        pairs_k.append(np.full(li.size, ki, dtype=np.int64))
        pairs_l.append(li.astype(np.int64))
        pairs_m.append(lattice.index_array(ksum[li]))
    pk = np.concatenate(pairs_k)
    pl = np.concatenate(pairs_l)
    pm = np.concatenate(pairs_m)
    mvec = arr[pm]

    order = np.argsort(pm, kind="stable")
    pk, pl, pm, mvec = pk[order], pl[order], pm[order], mvec[order]
    seg_starts = np.flatnonzero(np.r_[True, np.diff(pm) > 0])
    seg_modes = pm[seg_starts]

    acc = np.zeros((nmodes, n), dtype=complex)
    # one power stream per half-axis; e^{+t A} at a mode is the elementwise
    # conjugate of e^{-t A} there (real symbols), and the shared t = 0 node
    # gets its full trapezoid weight from the two endpoint halves.
    for side_steps in (steps, steps.conj()):
        offset = 0
        for back in _propagator_powers_stack(side_steps, n_steps + 1, chunk):
            nb = back.shape[0]
            weights = np.full(nb, dt)
            if offset == 0:
                weights[0] = 0.5 * dt
            if offset + nb == n_steps + 1:
                weights[-1] = 0.5 * dt
            evolved = np.einsum("bmpq,mq->bmp", back, state.coeffs)
            quad = np.einsum("aijk,btj,btk->btai", spec.quadratic, evolved[:, pk], evolved[:, pl])
            div = 1j * np.einsum("ta,btai->bti", mvec, quad)
            conv = np.zeros((nb, nmodes, n), dtype=complex)
            conv[:, seg_modes] = np.add.reduceat(div, seg_starts, axis=1)
            undone = np.einsum("bmpq,bmq->bmp", back.conj(), conv)
            acc += np.einsum("b,bmp->mp", weights, undone)
            offset += nb
    out = state.copy()
    out.coeffs = acc / (2.0 * t_span)
    return out


def _propagator_powers_stack(steps: np.ndarray, count: int, chunk: int) -> Iterator[np.ndarray]:
    """Powers of a stack of per-mode propagators: yields (block, nmodes, N, N)."""
    nmodes, n, _ = steps.shape
    block = np.empty((min(chunk, count), nmodes, n, n), dtype=complex)
    block[0] = np.eye(n)
    size = 1
    while size < block.shape[0]:
        take = min(size, block.shape[0] - size)
        block[size : size + take] = np.einsum("mpq,bmqr->bmpr", block[size - 1] @ steps, block[:take])
        size += take
    carry = np.broadcast_to(np.eye(n, dtype=complex), (nmodes, n, n)).copy()
    stride = block[-1] @ steps
    done = 0
    while done < count:
        take = min(block.shape[0], count - done)
        yield np.einsum("mpq,bmqr->bmpr", carry, block[:take])
        carry = carry @ stride
        done += take


def cyclic_residual(
    spec: SystemSpec,
    spectrum: Mapping[Mode, ModeDecomposition],
    table: ResonanceTable,
    w1: SpectralState,
    w2: SpectralState,
    w3: SpectralState,
) -> float:
    """Normalized magnitude of the cyclic sum of entropy pairings of qbar.

    Each pairing is normalized by its Cauchy-Schwarz magnitude, the largest
    of the three setting the scale; the bare pairings themselves can all
    vanish (equal arguments), which must read as a zero residual, not 0/0.
    Vanishes to roundoff on validated entropic systems; this cancellation is
    the mechanism behind nonlinear energy neutrality.
    """
    q23 = apply_averaged_quadratic(spec, spectrum, table, w2, w3)
    q31 = apply_averaged_quadratic(spec, spectrum, table, w3, w1)
    q12 = apply_averaged_quadratic(spec, spectrum, table, w1, w2)
    t1 = inner_product(spec, w1, q23)
    t2 = inner_product(spec, w2, q31)
    t3 = inner_product(spec, w3, q12)
    scale = max(
        energy_norm(spec, w1) * energy_norm(spec, q23),
        energy_norm(spec, w2) * energy_norm(spec, q31),
        energy_norm(spec, w3) * energy_norm(spec, q12),
        1e-300,
    )
    return abs(t1 + t2 + t3) / scale


def resonance_csv_rows(table: ResonanceTable) -> Iterator[list]:
    """(k..., j1, l..., j2, j3, frequency defect) rows for export."""
    arr = table.lattice.array
    for row, defect in zip(table.entries, table.defects):
        ki, j1, li, j2, _, j3 = (int(x) for x in row)
        yield [*arr[ki].tolist(), j1, *arr[li].tolist(), j2, j3, float(defect)]


def diffusion_csv_rows(avg: AveragedDiffusion) -> Iterator[list]:
    """(mode..., row, col, Re, Im) entries of every averaged diffusion block."""
    arr = avg.lattice.array
    n = avg.blocks.shape[1]
    for i in range(len(avg.lattice)):
        for p in range(n):
            for q in range(n):
                val = avg.blocks[i, p, q]
                yield [*arr[i].tolist(), p, q, float(val.real), float(val.imag)]
