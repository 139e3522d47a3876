"""Kawashima check and the constructive strict-dissipativity certificate.

The averaged diffusion operator is strictly dissipative when for some
alpha > 0 there is beta > 0 with

    g b(xi) + alpha^-2 a(xi)^T g b(xi) a(xi)  >=  beta g

for every unit direction xi.  With sphere maxima c_adv >= |a(xi)|_g and
c_diff >= |b(xi)|_g this yields the explicit decay rate

    eps   = alpha^4 beta / (alpha^4 beta + c_adv^4 c_diff) * beta / 4
    delta = alpha^2 beta eps / (2 c_adv^2 c_diff + alpha^2 beta),

a lower bound for the smallest generalized eigenvalue of
(-g dbar(xi), |xi|^2 g) at every mode.  The criterion implies the Kawashima
condition (no nonconstant eigenfunction of the advection operator may lie
in the null space of the diffusion operator), which is checked separately
and is the necessary condition for decay.

All direction scans are sampled (the sphere condition is continuous, any
finite check is a relaxation); the report records the sampling density.
Because the sample always contains every lattice direction the certificate
remains a true lower bound on the lattice where it is verified.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .averaging import AveragedDiffusion
from .directions import lattice_directions, unit_directions
from .spectral import FrequencyLattice
from .system import SystemSpec, advection_symbol, diffusion_symbol

__all__ = [
    "KawashimaWitness",
    "CriterionSearch",
    "DissipativityReport",
    "kawashima_check",
    "metric_operator_norm",
    "sphere_constants",
    "criterion_beta",
    "strict_criterion_search",
    "constructive_delta",
    "verify_delta",
    "analyze_dissipativity",
    "default_alpha_grid",
    "report_directions",
]


@dataclass(frozen=True)
class KawashimaWitness:
    direction: np.ndarray
    frequency: float
    vector: np.ndarray


def kawashima_check(
    spec: SystemSpec,
    directions: np.ndarray,
    tol_null: float = 1e-10,
) -> tuple[bool, list[KawashimaWitness]]:
    """Test whether any advection eigenvector is annihilated by the diffusion symbol.

    For each sampled direction, every eigenvector v of a(xi) is checked
    against |b(xi) v| <= tol_null * |b(xi)| |v|; matches are returned as
    witnesses (they correspond to nonconstant undamped waves).
    """
    dirs = np.atleast_2d(np.asarray(directions, dtype=float))
    if dirs.size == 0:
        raise ValueError("need at least one direction")
    witnesses: list[KawashimaWitness] = []
    root, inv_root = spec.metric_sqrt()
    for xi in dirs:
        bsym = diffusion_symbol(spec, xi)
        bnorm = np.linalg.norm(bsym, 2)
        sym = root @ advection_symbol(spec, xi) @ inv_root
        evals, vecs = np.linalg.eigh(0.5 * (sym + sym.T))
        for omega, col in zip(evals, vecs.T):
            vec = inv_root @ col
            vec = vec / np.linalg.norm(vec)
            if np.linalg.norm(bsym @ vec) <= tol_null * bnorm:
                witnesses.append(KawashimaWitness(np.array(xi), float(omega), vec))
    return (len(witnesses) == 0), witnesses


def metric_operator_norm(spec: SystemSpec, mat: np.ndarray) -> float:
    """Operator norm of `mat` in the entropy inner product."""
    root, inv_root = spec.metric_sqrt()
    return float(np.linalg.norm(root @ mat @ inv_root, 2))


def sphere_constants(spec: SystemSpec, directions: np.ndarray) -> tuple[float, float]:
    """Sampled sphere maxima of the advection and diffusion symbol norms."""
    c_adv = 0.0
    c_diff = 0.0
    for xi in np.atleast_2d(directions):
        c_adv = max(c_adv, metric_operator_norm(spec, advection_symbol(spec, xi)))
        c_diff = max(c_diff, metric_operator_norm(spec, diffusion_symbol(spec, xi)))
    return c_adv, c_diff


def beta_by_direction(spec: SystemSpec, alpha: float, directions: np.ndarray) -> np.ndarray:
    """Per-direction smallest generalized eigenvalue of the criterion pencil

        (g b(xi) + alpha^-2 a(xi)^T g b(xi) a(xi),  g).
    """
    g = spec.entropy_hessian
    out = np.empty(len(np.atleast_2d(directions)))
    for i, xi in enumerate(np.atleast_2d(directions)):
        a = advection_symbol(spec, xi)
        gb = g @ diffusion_symbol(spec, xi)
        mat = gb + (a.T @ gb @ a) / alpha**2
        mat = 0.5 * (mat + mat.T)
        vals = scipy.linalg.eigh(mat, g, eigvals_only=True)
        out[i] = float(vals[0])
    return out


def criterion_beta(spec: SystemSpec, alpha: float, directions: np.ndarray) -> float:
    """Worst direction of the criterion pencil: min of beta_by_direction."""
    return float(beta_by_direction(spec, alpha, directions).min())


def constructive_delta(alpha: float, beta: float, c_adv: float, c_diff: float) -> tuple[float, float]:
    """Explicit (epsilon, delta) with epsilon at its admissible cap.

    Any smaller epsilon would also certify decay; the cap maximizes delta.
    Always 0 < delta < epsilon < beta / 4.
    """
    if min(alpha, beta, c_adv, c_diff) <= 0.0:
        raise ValueError("all certificate inputs must be positive")
    epsilon = (alpha**4 * beta) / (alpha**4 * beta + c_adv**4 * c_diff) * (beta / 4.0)
    delta = (alpha**2 * beta * epsilon) / (2.0 * c_adv**2 * c_diff + alpha**2 * beta)
    return epsilon, delta


def default_alpha_grid(count: int = 32) -> np.ndarray:
    return np.logspace(-2.0, 2.0, count)


@dataclass(frozen=True)
class CriterionSearch:
    ok: bool
    alpha: float
    beta: float
    c_adv: float
    c_diff: float
    epsilon: float
    delta: float
    beta_by_alpha: tuple[tuple[float, float], ...] = ()


def strict_criterion_search(
    spec: SystemSpec,
    directions: np.ndarray,
    alphas: np.ndarray | None = None,
) -> CriterionSearch:
    """Scan the alpha grid and keep the (alpha, beta) pair maximizing delta.

    Failure (beta <= 0 for every alpha) is reported in the result, not
    raised: a system without the property is a finding, not an error.
    """
    if alphas is None:
        alphas = default_alpha_grid()
    alphas = np.asarray(alphas, dtype=float)
    if (alphas <= 0).any():
        raise ValueError("alpha grid must be positive")
    c_adv, c_diff = sphere_constants(spec, directions)
    # the certificate only needs valid upper bounds; a vanishing sampled
    # maximum (zero symbol) is floored so the formulas stay usable
    c_adv = max(c_adv, 1e-30)
    c_diff = max(c_diff, 1e-30)
    best: CriterionSearch | None = None
    pairs = []
    for alpha in alphas:
        beta = criterion_beta(spec, float(alpha), directions)
        pairs.append((float(alpha), float(beta)))
        if beta <= 0.0:
            continue
        epsilon, delta = constructive_delta(float(alpha), beta, c_adv, c_diff)
        if best is None or delta > best.delta:
            best = CriterionSearch(True, float(alpha), beta, c_adv, c_diff, epsilon, delta, ())
    if best is None:
        return CriterionSearch(False, float("nan"), 0.0, c_adv, c_diff, 0.0, 0.0, tuple(pairs))
    return CriterionSearch(True, best.alpha, best.beta, c_adv, c_diff, best.epsilon, best.delta, tuple(pairs))


def verify_delta(spec: SystemSpec, avg: AveragedDiffusion) -> float:
    """Empirical decay rate: min over nonzero modes of lambda_min(-g dbar(xi), |xi|^2 g).

    The constructive delta is a lower bound for this number wherever the
    criterion directions contained the lattice directions.
    """
    g = spec.entropy_hessian
    best = np.inf
    arr = avg.lattice.array
    for i, mode in enumerate(arr):
        sq = float((mode.astype(float) ** 2).sum())
        if sq == 0.0:
            continue
        gd = g @ avg.blocks[i]
        herm = -0.5 * (gd + gd.conj().T)
        vals = scipy.linalg.eigh(herm, sq * g.astype(complex), eigvals_only=True)
        best = min(best, float(vals[0]))
    return best


@dataclass(frozen=True)
class DissipativityReport:
    kawashima_ok: bool
    witnesses: tuple[KawashimaWitness, ...]
    alpha: float
    beta: float
    c_adv: float
    c_diff: float
    epsilon: float
    delta: float
    delta_empirical: float
    n_directions: int
    criterion_ok: bool
    beta_by_alpha: tuple[tuple[float, float], ...] = field(default=())
    beta_per_direction: tuple[tuple[tuple[float, ...], float], ...] = field(default=())

    def as_dict(self) -> dict:
        return {
            "kawashima_ok": self.kawashima_ok,
            "n_witnesses": len(self.witnesses),
            "alpha": self.alpha,
            "beta": self.beta,
            "c_adv": self.c_adv,
            "c_diff": self.c_diff,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "delta_empirical": self.delta_empirical,
            "n_directions": self.n_directions,
            "criterion_ok": self.criterion_ok,
        }


def report_directions(spec: SystemSpec, lattice: FrequencyLattice | None, extra: int = 200) -> np.ndarray:
    """Direction sample: every lattice direction plus a deterministic sphere set."""
    dirs = [unit_directions(spec.dim, extra)]
    if lattice is not None:
        lat = lattice_directions(lattice.array)
        if lat.size:
            dirs.append(lat)
    return np.concatenate(dirs, axis=0)


def analyze_dissipativity(
    spec: SystemSpec,
    lattice: FrequencyLattice | None = None,
    avg: AveragedDiffusion | None = None,
    alphas: np.ndarray | None = None,
    extra_directions: int = 200,
    tol_null: float = 1e-10,
) -> DissipativityReport:
    """Full certificate pipeline: Kawashima, criterion search, empirical rate."""
    dirs = report_directions(spec, lattice, extra_directions)
    kawashima_ok, witnesses = kawashima_check(spec, dirs, tol_null)
    search = strict_criterion_search(spec, dirs, alphas)
    delta_emp = float("nan")
    if avg is not None:
        delta_emp = verify_delta(spec, avg)
    per_direction = ()
    if search.ok:
        values = beta_by_direction(spec, search.alpha, dirs)
        per_direction = tuple(
            (tuple(float(c) for c in xi), float(v)) for xi, v in zip(dirs, values)
        )
    return DissipativityReport(
        kawashima_ok=kawashima_ok,
        witnesses=tuple(witnesses),
        alpha=search.alpha,
        beta=search.beta,
        c_adv=search.c_adv,
        c_diff=search.c_diff,
        epsilon=search.epsilon,
        delta=search.delta if search.ok else 0.0,
        delta_empirical=delta_emp,
        n_directions=len(dirs),
        criterion_ok=search.ok,
        beta_by_alpha=search.beta_by_alpha,
        beta_per_direction=per_direction,
    )
