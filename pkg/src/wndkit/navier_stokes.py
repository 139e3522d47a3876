"""Gas-dynamics instantiation: compressible Navier-Stokes symbol data.

Working variables are the primitive perturbations (rho, u, theta) about a
quiescent state (rho0, 0, theta0).  Writing p_r = dp/drho, p_t = dp/dtheta
and c_v = de/dtheta at the reference state, the convective-form
linearization gives the acoustic advection symbol

    a(xi):  rho row     rho0 xi . u
            u row       (p_r/rho0) xi rho + (p_t/rho0) xi theta
            theta row   (theta0 p_t / (rho0 c_v)) xi . u

with eigenvalues {0 (multiplicity d), +- c0 |xi|} and sound speed

    c0^2 = p_r + theta0 p_t^2 / (rho0^2 c_v).

The diffusion tensor carries shear/bulk viscosity on the velocity block and
thermal conduction on the temperature block; the entropy Hessian of
H = -rho * sigma conjugated to primitive variables is diagonal,

    g = diag( p_r/(rho0 theta0),  (rho0/theta0) I_d,  rho0 c_v / theta0^2 ).

The quadratic kernel is the conserved-variable flux Hessian conjugated to
primitive variables; the second-order map correction belongs to the
derivative terms that time-average to zero, so what remains is the
primitive flux Hessian minus the advection symbol applied to the
second-order change-of-variables kernel.  Second derivatives of a general
equation of state are closed through the Maxwell relation

    eps_r = (p - theta p_t) / rho^2,

leaving (p_rr, p_rt, p_tt, dc_v/dtheta) as the only extra data; when not
supplied they are finite-differenced from the first partials.

The acoustic eigenvectors at mode k,

    h_k(+-) = sqrt(theta0 / 2 rho0) * (rho0/c0, +- k/|k|, theta0 p_t/(rho0 c_v c0)),

are g-orthonormal, and acoustic resonance is an exact integer condition on
squared mode norms, decided without floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .averaging import apply_averaged_quadratic
from .spectral import FrequencyLattice, Mode, ModeDecomposition
from .state import SpectralState, inner_product, zero_state
from .system import SystemSpec, change_of_variables

__all__ = [
    "EquationOfState",
    "TransportCoefficients",
    "ideal_gas",
    "sound_speed",
    "acoustic_diffusivity",
    "heat_capacity_pressure",
    "CnsModel",
    "build_cns_model",
    "build_cns_spec",
    "acoustic_basis",
    "wcns_split",
    "acoustic_sum_resonant",
    "make_exact_resonance_rule",
    "conserved_flux",
    "simulate_incompressible_reference",
    "wcns_coupling_report",
    "PRESETS",
    "build_preset",
]

Scalar = Callable[[float, float], float]


@dataclass(frozen=True)
class EquationOfState:
    """p(rho, theta), eps(rho, theta) and the first partials that fix the symbols.

    Optional second partials sharpen the quadratic kernel; the Maxwell
    relation supplies every eps derivative from the pressure ones.
    """

    pressure: Scalar
    energy: Scalar
    pressure_rho: Scalar
    pressure_theta: Scalar
    heat_capacity: Scalar  # d eps / d theta
    pressure_rho_rho: Scalar | None = None
    pressure_rho_theta: Scalar | None = None
    pressure_theta_theta: Scalar | None = None
    heat_capacity_theta: Scalar | None = None
    theta_from_energy: Scalar | None = None  # inverse of eps(rho, .), for conserved-variable work
    name: str = "custom"

    def validate_at(self, rho: float, theta: float) -> None:
        if rho <= 0.0 or theta <= 0.0:
            raise ValueError("reference state must have rho > 0 and theta > 0")
        if self.heat_capacity(rho, theta) <= 0.0:
            raise ValueError("equation of state violates d eps/d theta > 0")
        if self.pressure_rho(rho, theta) <= 0.0:
            raise ValueError("equation of state violates dp/drho > 0")


def ideal_gas(micro_dim: int = 3) -> EquationOfState:
    """p = rho * theta, eps = (D/2) * theta, with D the microscopic dimension."""
    half_d = micro_dim / 2.0
    return EquationOfState(
        pressure=lambda rho, theta: rho * theta,
        energy=lambda rho, theta: half_d * theta,
        pressure_rho=lambda rho, theta: theta,
        pressure_theta=lambda rho, theta: rho,
        heat_capacity=lambda rho, theta: half_d,
        pressure_rho_rho=lambda rho, theta: 0.0,
        pressure_rho_theta=lambda rho, theta: 1.0,
        pressure_theta_theta=lambda rho, theta: 0.0,
        heat_capacity_theta=lambda rho, theta: 0.0,
        theta_from_energy=lambda rho, eps: eps / half_d,
        name=f"ideal-gas-D{micro_dim}",
    )


@dataclass(frozen=True)
class TransportCoefficients:
    """Constant transport data at the reference state."""

    shear: float
    bulk: float
    thermal: float
    micro_dim: int = 3

    def validate_for_dim(self, dim: int) -> None:
        if self.shear < 0.0 or self.bulk < 0.0 or self.thermal < 0.0:
            raise ValueError("transport coefficients must be nonnegative")
        if self.micro_dim < max(2, dim):
            raise ValueError("microscopic dimension must be at least max(2, d)")


def _fd(fun: Scalar, rho: float, theta: float, which: str) -> float:
    h_r = 1e-6 * max(1.0, abs(rho))
    h_t = 1e-6 * max(1.0, abs(theta))
    if which == "rho":
        return (fun(rho + h_r, theta) - fun(rho - h_r, theta)) / (2.0 * h_r)
    return (fun(rho, theta + h_t) - fun(rho, theta - h_t)) / (2.0 * h_t)


def sound_speed(eos: EquationOfState, rho: float, theta: float) -> float:
    """c0 = sqrt( dp/drho + theta (dp/dtheta)^2 / (rho^2 c_v) )."""
    eos.validate_at(rho, theta)
    p_r = eos.pressure_rho(rho, theta)
    p_t = eos.pressure_theta(rho, theta)
    c_v = eos.heat_capacity(rho, theta)
    c_sq = p_r + theta * p_t**2 / (rho**2 * c_v)
    if c_sq <= 0.0:
        raise ValueError("equation of state yields a nonpositive squared sound speed")
    return math.sqrt(c_sq)


def acoustic_diffusivity(
    eos: EquationOfState, transport: TransportCoefficients, rho: float, theta: float
) -> float:
    """Decay coefficient of the averaged dynamics on the acoustic subspace."""
    c_sq = sound_speed(eos, rho, theta) ** 2
    p_t = eos.pressure_theta(rho, theta)
    c_v = eos.heat_capacity(rho, theta)
    d_micro = transport.micro_dim
    viscous = (2.0 * (d_micro - 1.0) / d_micro * transport.shear + transport.bulk) / (2.0 * rho)
    thermal = transport.thermal / (2.0 * rho * c_v) * (theta * p_t**2) / (rho**2 * c_v * c_sq)
    return viscous + thermal


def heat_capacity_pressure(eos: EquationOfState, rho: float, theta: float) -> float:
    """c_p = c_v + theta (dp/dtheta)^2 / (rho^2 dp/drho)."""
    p_r = eos.pressure_rho(rho, theta)
    p_t = eos.pressure_theta(rho, theta)
    return eos.heat_capacity(rho, theta) + theta * p_t**2 / (rho**2 * p_r)


@dataclass(eq=False)
class CnsModel:
    """Reference-state numbers plus the assembled primitive-variable spec."""

    eos: EquationOfState
    transport: TransportCoefficients
    rho: float
    theta: float
    dim: int
    spec: SystemSpec
    sound: float
    diffusivity: float
    p_rho: float
    p_theta: float
    c_v: float
    c_p: float
    conserved_jacobian: np.ndarray  # dU/dW at the reference state

    @property
    def ncomp(self) -> int:
        return self.dim + 2


def _second_derivatives(eos: EquationOfState, rho: float, theta: float) -> tuple[float, float, float, float]:
    p_rr = eos.pressure_rho_rho(rho, theta) if eos.pressure_rho_rho else _fd(eos.pressure_rho, rho, theta, "rho")
    p_rt = (
        eos.pressure_rho_theta(rho, theta)
        if eos.pressure_rho_theta
        else _fd(eos.pressure_rho, rho, theta, "theta")
    )
    p_tt = (
        eos.pressure_theta_theta(rho, theta)
        if eos.pressure_theta_theta
        else _fd(eos.pressure_theta, rho, theta, "theta")
    )
    cv_t = (
        eos.heat_capacity_theta(rho, theta)
        if eos.heat_capacity_theta
        else _fd(eos.heat_capacity, rho, theta, "theta")
    )
    return p_rr, p_rt, p_tt, cv_t


def build_cns_model(
    eos: EquationOfState,
    transport: TransportCoefficients,
    rho: float,
    theta: float,
    dim: int,
) -> CnsModel:
    """Assemble the primitive-variable symbol data analytically."""
    eos.validate_at(rho, theta)
    transport.validate_for_dim(dim)
    n = dim + 2
    p = eos.pressure(rho, theta)
    p_r = eos.pressure_rho(rho, theta)
    p_t = eos.pressure_theta(rho, theta)
    c_v = eos.heat_capacity(rho, theta)
    eps = eos.energy(rho, theta)
    eps_r = (p - theta * p_t) / rho**2  # Maxwell relation
    p_rr, p_rt, p_tt, cv_t = _second_derivatives(eos, rho, theta)
    eps_rr = (p_r - theta * p_rt) / rho**2 - 2.0 * (p - theta * p_t) / rho**3
    eps_rt = -theta * p_tt / rho**2
    eps_tt = cv_t

    r_idx, t_idx = 0, dim + 1

    adv = np.zeros((dim, n, n))
    for a in range(dim):
        adv[a, r_idx, 1 + a] = rho
        adv[a, 1 + a, r_idx] = p_r / rho
        adv[a, 1 + a, t_idx] = p_t / rho
        adv[a, t_idx, 1 + a] = theta * p_t / (rho * c_v)

    zeta = (1.0 - 2.0 / transport.micro_dim) * transport.shear + transport.bulk
    diff = np.zeros((dim, dim, n, n))
    for a in range(dim):
        for b in range(dim):
            if a == b:
                diff[a, b, t_idx, t_idx] = transport.thermal / (rho * c_v)
                for i in range(dim):
                    diff[a, b, 1 + i, 1 + i] += transport.shear / rho
            diff[a, b, 1 + a, 1 + b] += zeta / rho

    ghess = np.zeros((n, n))
    ghess[r_idx, r_idx] = p_r / (rho * theta)
    for i in range(dim):
        ghess[1 + i, 1 + i] = rho / theta
    ghess[t_idx, t_idx] = rho * c_v / theta**2

    def sym_outer(i: int, j: int) -> np.ndarray:
        mat = np.zeros((n, n))
        mat[i, j] += 0.5
        mat[j, i] += 0.5
        return mat

    # pressure Hessian and second-order state-map kernel as quadratic forms
    p_hess = np.zeros((n, n))
    p_hess[r_idx, r_idx] = p_rr
    p_hess[t_idx, t_idx] = p_tt
    p_hess += 2.0 * p_rt * sym_outer(r_idx, t_idx)

    s_theta = np.zeros((n, n))
    for j in range(dim):
        s_theta[1 + j, 1 + j] += rho
    s_theta[r_idx, r_idx] += 2.0 * eps_r + rho * eps_rr
    s_theta += (2.0 * c_v + 2.0 * rho * eps_rt) * sym_outer(r_idx, t_idx)
    s_theta[t_idx, t_idx] += rho * eps_tt
    s_theta /= 2.0 * rho * c_v

    quad = np.zeros((dim, n, n, n))
    for a in range(dim):
        for i in range(dim):
            quad[a, 1 + i] += sym_outer(1 + i, 1 + a)
            if i == a:
                quad[a, 1 + i] += p_hess / (2.0 * rho) - (p_t / rho) * s_theta
        quad[a, t_idx] += ((p_r - theta * p_t / rho) / (rho * c_v)) * sym_outer(1 + a, r_idx)
        quad[a, t_idx] += ((rho * c_v + p_t) / (rho * c_v)) * sym_outer(1 + a, t_idx)

    state = np.zeros(n)
    state[r_idx] = rho
    state[t_idx] = theta
    labels = ("rho",) + tuple(f"u{i+1}" for i in range(dim)) + ("theta",)
    spec = SystemSpec(
        dim=dim,
        ncomp=n,
        state=state,
        advection=adv,
        diffusion=diff,
        quadratic=quad,
        entropy_hessian=ghess,
        labels=labels,
    )

    jac = np.zeros((n, n))
    jac[r_idx, r_idx] = 1.0
    for i in range(dim):
        jac[1 + i, 1 + i] = rho
    jac[t_idx, r_idx] = eps + rho * eps_r
    jac[t_idx, t_idx] = rho * c_v

    return CnsModel(
        eos=eos,
        transport=transport,
        rho=rho,
        theta=theta,
        dim=dim,
        spec=spec,
        sound=sound_speed(eos, rho, theta),
        diffusivity=acoustic_diffusivity(eos, transport, rho, theta),
        p_rho=p_r,
        p_theta=p_t,
        c_v=c_v,
        c_p=heat_capacity_pressure(eos, rho, theta),
        conserved_jacobian=jac,
    )


def build_cns_spec(
    eos: EquationOfState,
    transport: TransportCoefficients,
    rho: float,
    theta: float,
    dim: int,
    variables: str = "primitive",
) -> SystemSpec:
    """Primitive-variable spec, or its conserved-variable conjugate."""
    model = build_cns_model(eos, transport, rho, theta, dim)
    if variables == "primitive":
        return model.spec
    if variables != "conserved":
        raise ValueError("variables must be 'primitive' or 'conserved'")
    transform = np.linalg.inv(model.conserved_jacobian)
    spec = change_of_variables(model.spec, transform)
    u0 = np.zeros(model.ncomp)
    u0[0] = rho
    u0[-1] = rho * eos.energy(rho, theta)
    return replace_state(spec, u0)


def replace_state(spec: SystemSpec, new_state: np.ndarray) -> SystemSpec:
    return SystemSpec(
        dim=spec.dim,
        ncomp=spec.ncomp,
        state=new_state,
        advection=spec.advection,
        diffusion=spec.diffusion,
        quadratic=spec.quadratic,
        entropy_hessian=spec.entropy_hessian,
        labels=spec.labels,
    )


def acoustic_basis(model: CnsModel, k) -> tuple[np.ndarray, np.ndarray]:
    """g-orthonormal acoustic eigenvectors (h_plus, h_minus) at nonzero mode k."""
    kvec = np.asarray(k, dtype=float)
    norm = np.linalg.norm(kvec)
    if norm == 0.0:
        raise ValueError("acoustic basis is undefined at the zero mode")
    scale = math.sqrt(model.theta / (2.0 * model.rho))
    head = model.rho / model.sound
    tail = model.theta * model.p_theta / (model.rho * model.c_v * model.sound)
    unit = kvec / norm
    plus = scale * np.concatenate([[head], unit, [tail]])
    minus = scale * np.concatenate([[head], -unit, [tail]])
    return plus, minus


def wcns_split(
    model: CnsModel,
    spectrum: Mapping[Mode, ModeDecomposition],
    state: SpectralState,
) -> tuple[SpectralState, SpectralState]:
    """Split into the advection null component and the acoustic component.

    Null-branch projection per mode gives the incompressible part
    (divergence-free velocity, pressure-neutral thermodynamics); the rest
    lives on the +-c0|k| eigenspaces.  The zero mode is incompressible.
    """
    w_in = state.copy()
    w_ac = state.copy()
    thr = 0.5 * model.sound
    for mode, dec in spectrum.items():
        idx = state.lattice.index(mode)
        null_mask = np.abs(dec.frequencies) < thr
        if null_mask.any():
            p_null = np.einsum("jpq->pq", dec.projectors[null_mask])
            w_in.coeffs[idx] = p_null @ state.coeffs[idx]
        else:
            w_in.coeffs[idx] = 0.0
        w_ac.coeffs[idx] = state.coeffs[idx] - w_in.coeffs[idx]
    return w_in, w_ac


def acoustic_sum_resonant(a: int, b: int, c: int, s1: int, s2: int, s3: int) -> bool:
    """Decide s1 sqrt(a) + s2 sqrt(b) = s3 sqrt(c) exactly over the integers.

    a, b, c are squared mode norms; s in {-1, 0, +1} labels the frequency
    branch.  No floating point: after dropping vanishing terms the one- and
    two-term cases are sign/value comparisons and the three-term case is the
    integer identity (c - a - b)^2 = 4ab with a sign constraint.
    """
    terms = [(s, n) for s, n in ((s1, a), (s2, b), (-s3, c)) if s != 0 and n > 0]
    if not terms:
        return True
    if len(terms) == 1:
        return False
    if len(terms) == 2:
        (sa, na), (sb, nb) = terms
        return sa * sb < 0 and na == nb
    signs = [s for s, _ in terms]
    total = sum(signs)
    if total == 3 or total == -3:
        return False
    if total == 1:  # flip so exactly one sign is positive -> that term is the sum
        terms = [(-s, n) for s, n in terms]
    plus = [n for s, n in terms if s > 0]
    minus = [n for s, n in terms if s < 0]
    nc = plus[0]
    na, nb = minus
    gap = nc - na - nb
    return gap >= 0 and gap * gap == 4 * na * nb


def make_exact_resonance_rule(model: CnsModel):
    """Adapter from (mode, frequency) triples to the integer acoustic rule."""
    thr = 0.5 * model.sound

    def classify(omega: float) -> int:
        if abs(omega) < thr:
            return 0
        return 1 if omega > 0 else -1

    def rule(kmode: Mode, w1: float, lmode: Mode, w2: float, mmode: Mode, w3: float) -> bool:
        a = sum(int(c) * int(c) for c in kmode)
        b = sum(int(c) * int(c) for c in lmode)
        c = sum(int(c) * int(c) for c in mmode)
        return acoustic_sum_resonant(a, b, c, classify(w1), classify(w2), classify(w3))

    return rule


def conserved_flux(eos: EquationOfState, u_vec: np.ndarray, dim: int) -> np.ndarray:
    """Conserved-variable flux (dim, N); needs an invertible energy law."""
    if eos.theta_from_energy is None:
        raise ValueError("equation of state does not provide theta_from_energy")
    u_vec = np.asarray(u_vec, dtype=float)
    rho = u_vec[0]
    mom = u_vec[1 : 1 + dim]
    total = u_vec[dim + 1]
    vel = mom / rho
    eps = total / rho - 0.5 * float(vel @ vel)
    theta = eos.theta_from_energy(rho, eps)
    p = eos.pressure(rho, theta)
    flux = np.empty((dim, dim + 2))
    for a in range(dim):
        flux[a, 0] = mom[a]
        flux[a, 1 : 1 + dim] = mom * vel[a]
        flux[a, 1 + a] += p
        flux[a, dim + 1] = (total + p) * vel[a]
    return flux


def _pair_arrays(lattice: FrequencyLattice):
    arr = lattice.array
    pk, pl, pm = [], [], []
    for ki in range(len(lattice)):
        ksum = arr + arr[ki]
        inside = np.abs(ksum).max(axis=1) <= lattice.radius
        li = np.flatnonzero(inside)
        pk.append(np.full(li.size, ki, dtype=np.int64))
        pl.append(li.astype(np.int64))
        pm.append(lattice.index_array(ksum[li]))
    pk = np.concatenate(pk)
    pl = np.concatenate(pl)
    pm = np.concatenate(pm)
    order = np.argsort(pm, kind="stable")
    pk, pl, pm = pk[order], pl[order], pm[order]
    seg = np.flatnonzero(np.r_[True, np.diff(pm) > 0])
    return pk, pl, pm, seg, pm[seg]


def simulate_incompressible_reference(
    model: CnsModel,
    lattice: FrequencyLattice,
    u_hat: np.ndarray,
    theta_hat: np.ndarray,
    t_end: float,
    dt: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Leray-projected spectral solve of the incompressible subsystem

        rho0 (du/dt + u.grad u) + grad p = shear * lap u,    div u = 0,
        rho0 c_p (dtheta/dt + u.grad theta) = thermal * lap theta,

    truncated to the same lattice (convolution modes outside it dropped),
    advanced by integrating-factor RK4 with scalar decay factors.  Entirely
    independent of the generic averaged machinery; used as its oracle.
    """
    dim = model.dim
    arr = lattice.array.astype(float)
    sq = (arr**2).sum(axis=1)
    nu_u = model.transport.shear / model.rho
    nu_t = model.transport.thermal / (model.rho * model.c_p)
    pk, pl, pm, seg, seg_modes = _pair_arrays(lattice)
    lvec = arr[pl]

    nonzero = sq > 0
    leray = np.zeros((len(lattice), dim, dim))
    leray[:] = np.eye(dim)
    leray[nonzero] -= arr[nonzero, :, None] * arr[nonzero, None, :] / sq[nonzero, None, None]

    def tendency(u: np.ndarray, th: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dot = 1j * np.einsum("pd,pd->p", u[pk], lvec.astype(complex))
        adv_u = dot[:, None] * u[pl]
        adv_t = dot * th[pl]
        conv_u = np.zeros_like(u)
        conv_t = np.zeros_like(th)
        conv_u[seg_modes] = np.add.reduceat(adv_u, seg, axis=0)
        conv_t[seg_modes] = np.add.reduceat(adv_t, seg, axis=0)
        du = -np.einsum("mde,me->md", leray, conv_u)
        dth = -conv_t
        zero = lattice.zero_index()
        du[zero] = 0.0
        dth[zero] = 0.0
        return du, dth

    n_steps = int(round(t_end / dt))
    u = u_hat.astype(complex).copy()
    th = theta_hat.astype(complex).copy()
    e_u = np.exp(-nu_u * sq * dt)[:, None]
    e_t = np.exp(-nu_t * sq * dt)
    h_u = np.exp(-nu_u * sq * 0.5 * dt)[:, None]
    h_t = np.exp(-nu_t * sq * 0.5 * dt)

    for _ in range(n_steps):
        k1u, k1t = tendency(u, th)
        k2u, k2t = tendency(h_u * (u + 0.5 * dt * k1u), h_t * (th + 0.5 * dt * k1t))
        k3u, k3t = tendency(h_u * u + 0.5 * dt * k2u, h_t * th + 0.5 * dt * k2t)
        k4u, k4t = tendency(h_u * (h_u * u + dt * k3u), h_t * (h_t * th + dt * k3t))
        u = e_u * u + (dt / 6.0) * (e_u * k1u + 2.0 * h_u * (k2u + k3u) + k4u)
        th = e_t * th + (dt / 6.0) * (e_t * k1t + 2.0 * h_t * (k2t + k3t) + k4t)
    return u, th


def _single_mode_state(lattice: FrequencyLattice, ncomp: int, mode, coeff: np.ndarray) -> SpectralState:
    out = zero_state(lattice, ncomp)
    out.coeffs[lattice.index(mode)] = coeff
    return out


def _transverse_unit(model: CnsModel, lmode) -> np.ndarray | None:
    lvec = np.asarray(lmode, dtype=float)
    if model.dim != 2:
        raise ValueError("coupling probes are defined for d = 2")
    t = np.array([-lvec[1], lvec[0]])
    norm = np.linalg.norm(t)
    if norm == 0.0:
        return None
    vec = np.zeros(model.ncomp)
    vec[1:3] = t / norm
    g = model.spec.entropy_hessian
    return vec / math.sqrt(float(vec @ g @ vec))


def _thermo_unit(model: CnsModel) -> np.ndarray:
    vec = np.zeros(model.ncomp)
    vec[0] = model.p_theta
    vec[-1] = -model.p_rho
    g = model.spec.entropy_hessian
    return vec / math.sqrt(float(vec @ g @ vec))


def wcns_coupling_report(
    model: CnsModel,
    spectrum: Mapping[Mode, ModeDecomposition],
    table,
) -> dict:
    """Empirical interaction amplitudes of the averaged quadratic operator.

    The mode-sum coefficients of the split system are not transcribed from
    anywhere; they are read off the generic operator through four canonical
    resonant probes (acoustic-in-velocity, two acoustic-in-temperature
    geometries, collinear acoustic-acoustic).  Values are reported as found,
    normalized by |m| and the probe geometry, with no asserted reference.
    """
    if model.dim != 2:
        raise ValueError("coupling probes are defined for d = 2")
    lattice = table.lattice
    spec = model.spec
    g = spec.entropy_hessian

    def amplitude(probe1: SpectralState, probe2: SpectralState, mmode, out_vec: np.ndarray) -> complex:
        out = apply_averaged_quadratic(spec, spectrum, table, probe1, probe2)
        coeff = out.coeffs[lattice.index(mmode)]
        return complex(out_vec @ g @ coeff)

    report: dict = {
        "sound_speed": model.sound,
        "acoustic_diffusivity": model.diffusivity,
        "couplings": {},
    }

    # collinear acoustic-acoustic self interaction (+,+ -> +)
    k, l = (1, 0), (2, 0)
    m = (3, 0)
    h_k, _ = acoustic_basis(model, k)
    h_l, _ = acoustic_basis(model, l)
    h_m, _ = acoustic_basis(model, m)
    amp = amplitude(
        _single_mode_state(lattice, model.ncomp, k, h_k.astype(complex)),
        _single_mode_state(lattice, model.ncomp, l, h_l.astype(complex)),
        m,
        h_m,
    )
    norm_m = math.sqrt(sum(c * c for c in m))
    report["couplings"]["acoustic_acoustic"] = {
        "k": list(k), "l": list(l), "branches": "+,+ -> +",
        "raw": [amp.real, amp.imag],
        "normalized": (amp / (1j * norm_m)).real,
    }

    # incompressible velocity driving an acoustic branch: |k| = |m| geometry
    k, l, m = (3, 4), (-3, 1), (0, 5)
    if lattice.contains(k) and lattice.contains(l) and lattice.contains(m):
        h_k, _ = acoustic_basis(model, k)
        h_m, _ = acoustic_basis(model, m)
        t_unit = _transverse_unit(model, l)
        amp = amplitude(
            _single_mode_state(lattice, model.ncomp, k, h_k.astype(complex)),
            _single_mode_state(lattice, model.ncomp, l, t_unit.astype(complex)),
            m,
            h_m,
        )
        report["couplings"]["acoustic_velocity"] = {
            "k": list(k), "l": list(l), "branches": "+,0 -> +",
            "raw": [amp.real, amp.imag],
            "normalized": (amp / (1j * 5.0)).real,
        }

    # incompressible temperature driving an acoustic branch, two geometries
    thermo = _thermo_unit(model)
    for name, (k, l, m) in {
        "acoustic_thermal_a": ((3, 4), (-3, 1), (0, 5)),
        "acoustic_thermal_b": ((0, 5), (3, -1), (3, 4)),
    }.items():
        if not (lattice.contains(k) and lattice.contains(l) and lattice.contains(m)):
            continue
        h_k, _ = acoustic_basis(model, k)
        h_m, _ = acoustic_basis(model, m)
        amp = amplitude(
            _single_mode_state(lattice, model.ncomp, k, h_k.astype(complex)),
            _single_mode_state(lattice, model.ncomp, l, thermo.astype(complex)),
            m,
            h_m,
        )
        norm_m = math.sqrt(sum(c * c for c in m))
        report["couplings"][name] = {
            "k": list(k), "l": list(l), "branches": "+,0 -> +",
            "raw": [amp.real, amp.imag],
            "normalized": (amp / (1j * norm_m)).real,
        }

    counts: dict[str, int] = {}
    freqs = {i: spectrum[mode].frequencies for i, mode in enumerate(lattice)}
    thr = 0.5 * model.sound
    for row in table.entries:
        ki, j1, li, j2, mi, j3 = (int(x) for x in row)
        key = "".join(
            "0" if abs(freqs[idx][j]) < thr else ("+" if freqs[idx][j] > 0 else "-")
            for idx, j in ((ki, j1), (li, j2), (mi, j3))
        )
        counts[key] = counts.get(key, 0) + 1
    report["resonance_counts"] = dict(sorted(counts.items()))
    report["n_triples"] = int(len(table.entries))
    return report


PRESETS: dict[str, dict] = {
    "ideal-gas-2d": {"dim": 2, "rho": 1.0, "theta": 1.0, "micro_dim": 3, "shear": 1.0, "bulk": 0.0, "thermal": 1.0},
    "ideal-gas-1d": {"dim": 1, "rho": 1.0, "theta": 1.0, "micro_dim": 3, "shear": 1.0, "bulk": 0.0, "thermal": 1.0},
}


def build_preset(name: str, **overrides) -> CnsModel:
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    params = dict(PRESETS[name])
    params.update(overrides)
    eos = ideal_gas(params["micro_dim"])
    transport = TransportCoefficients(
        shear=params["shear"], bulk=params["bulk"], thermal=params["thermal"], micro_dim=params["micro_dim"]
    )
    return build_cns_model(eos, transport, params["rho"], params["theta"], params["dim"])
