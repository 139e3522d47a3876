"""Truncated integer frequency lattice and per-mode spectral decomposition.

On the 2*pi-periodic torus the skew generator acts mode by mode through the
real-spectrum pencil i*a(xi).  Because g a(xi) is symmetric, the similar
matrix  s = g^{1/2} a(xi) g^{-1/2}  is symmetric, so eigenvalues are real
and the eigenprojectors are orthogonal in the g inner product.  Eigenvalues
closer than a clustering tolerance are merged into a single frequency with a
summed projector: the group average sums over eigenspaces, and letting a
near-degenerate pair split would silently corrupt every averaged operator
built on top.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

import numpy as np

from .system import SystemSpec, advection_symbol

__all__ = [
    "FrequencyLattice",
    "ModeDecomposition",
    "decompose",
    "evolve_group",
    "frequency_spectrum",
    "spectrum_csv_rows",
]

Mode = tuple[int, ...]


@dataclass(eq=False)
class FrequencyLattice:
    """All integer modes with max-norm at most `radius`, in lexicographic order.

    The ordering is the reproducibility contract: every reduction over modes
    follows it, so parallel construction with an ordered merge is
    deterministic.  The set is closed under negation by construction.
    """

    dim: int
    radius: int

    def __post_init__(self) -> None:
        if self.dim < 1 or self.radius < 0:
            raise ValueError("need dim >= 1 and radius >= 0")
        span = np.arange(-self.radius, self.radius + 1)
        grids = np.meshgrid(*([span] * self.dim), indexing="ij")
        arr = np.stack([g.ravel(order="C") for g in grids], axis=1).astype(np.int64)
        self.array = arr
        self.array.setflags(write=False)
        self.modes: tuple[Mode, ...] = tuple(tuple(int(c) for c in row) for row in arr)
        self._strides = (2 * self.radius + 1) ** np.arange(self.dim - 1, -1, -1)
        # index of -xi for each xi; lex order reverses under negation
        self.negation = np.arange(len(self.modes) - 1, -1, -1)
        self.negation.setflags(write=False)

    def __len__(self) -> int:
        return len(self.modes)

    def __iter__(self) -> Iterator[Mode]:
        return iter(self.modes)

    def contains(self, mode: Sequence[int]) -> bool:
        return all(abs(int(c)) <= self.radius for c in mode)

    def index(self, mode: Sequence[int]) -> int:
        if not self.contains(mode):
            raise KeyError(f"mode {tuple(mode)} outside lattice of radius {self.radius}")
        shifted = np.asarray(mode, dtype=np.int64) + self.radius
        return int(shifted @ self._strides)

    def index_array(self, modes: np.ndarray) -> np.ndarray:
        """Vectorized index lookup; caller guarantees containment."""
        return (np.asarray(modes, dtype=np.int64) + self.radius) @ self._strides

    def zero_index(self) -> int:
        return self.index((0,) * self.dim)


@dataclass(eq=False)
class ModeDecomposition:
    """Distinct real frequencies and g-orthogonal eigenprojectors at one mode.

    Invariants (up to roundoff): projectors sum to the identity, are mutually
    annihilating idempotents, are self-adjoint in the g inner product, and
    reassemble the advection symbol as sum_j omega_j * p_j.
    """

    mode: Mode
    frequencies: np.ndarray
    projectors: np.ndarray
    cluster_tol: float

    @property
    def nfreq(self) -> int:
        return len(self.frequencies)


def _cluster(eigenvalues: np.ndarray, tol: float) -> list[np.ndarray]:
    scale = max(float(np.abs(eigenvalues).max()), 1.0) if eigenvalues.size else 1.0
    groups: list[np.ndarray] = []
    start = 0
    for i in range(1, len(eigenvalues)):
        if eigenvalues[i] - eigenvalues[i - 1] > tol * scale:
            groups.append(np.arange(start, i))
            start = i
    groups.append(np.arange(start, len(eigenvalues)))
    return groups


def decompose(spec: SystemSpec, mode: Sequence[int], cluster_tol: float = 1e-9) -> ModeDecomposition:
    """Eigenstructure of the advection symbol at one integer mode.

    Solved as the symmetric problem on g^{1/2} a(xi) g^{-1/2}; eigenvalues
    within cluster_tol * max|omega| of each other merge into one frequency
    whose stored value is the cluster mean.
    """
    key = tuple(int(c) for c in mode)
    n = spec.ncomp
    if not any(key):
        return ModeDecomposition(
            mode=key,
            frequencies=np.zeros(1),
            projectors=np.eye(n)[None, :, :],
            cluster_tol=cluster_tol,
        )
    root, inv_root = spec.metric_sqrt()
    sym = root @ advection_symbol(spec, np.asarray(key, dtype=float)) @ inv_root
    evals, vecs = np.linalg.eigh(0.5 * (sym + sym.T))
    groups = _cluster(evals, cluster_tol)
    freqs = np.array([evals[g].mean() for g in groups])
    projs = np.empty((len(groups), n, n))
    for j, g in enumerate(groups):
        block = vecs[:, g]
        projs[j] = inv_root @ (block @ block.T) @ root
    return ModeDecomposition(mode=key, frequencies=freqs, projectors=projs, cluster_tol=cluster_tol)


def evolve_group(dec: ModeDecomposition, t: float, vec: np.ndarray) -> np.ndarray:
    """Apply the unitary mode propagator sum_j exp(-i omega_j t) p_j."""
    phases = np.exp(-1j * dec.frequencies * t)
    return np.einsum("j,jpq,q->p", phases, dec.projectors, np.asarray(vec, dtype=complex))


def frequency_spectrum(
    spec: SystemSpec, lattice: FrequencyLattice, cluster_tol: float = 1e-9
) -> dict[Mode, ModeDecomposition]:
    """Decomposition at every lattice mode, emitted in lattice order."""
    if len(lattice) == 0:
        raise ValueError("lattice is empty")
    return {mode: decompose(spec, mode, cluster_tol) for mode in lattice}


def spectrum_csv_rows(spectrum: Mapping[Mode, ModeDecomposition]) -> Iterator[list]:
    """Diagnostic rows (mode components..., frequency index, omega, projector rank)."""
    for mode, dec in spectrum.items():
        for j, omega in enumerate(dec.frequencies):
            rank = int(round(float(np.trace(dec.projectors[j]))))
            yield [*mode, j, float(omega), rank]
