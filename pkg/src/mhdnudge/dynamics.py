"""2D MHD in Elsasser variables: parameters, forcing, IMEX time stepping.

The evolved system is

    dv/dt = alpha Lap v + beta Lap w - P[(w.grad)v] + P[f]
    dw/dt = alpha Lap w + beta Lap v - P[(v.grad)w] + P[g]

with alpha = (1/Re + 1/Rm)/2, beta = |1/Re - 1/Rm|/2 and P the Leray
projection (pressure never appears).  Time discretization: Crank-Nicolson
on the coupled diffusion block (a per-mode linear solve), Adams-Bashforth 2
on advection and forcing, explicit Euler on the first step.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .spectral import (
    Grid,
    SpectralVectorField,
    dealias_coef,
    leray_project_coef,
)

FOUR_PI_SQ = 4.0 * np.pi ** 2


class CflError(RuntimeError):
    def __init__(self, dt: float, admissible_dt: float):
        super().__init__(
            f"CFL violation: dt={dt:.3e} exceeds admissible dt={admissible_dt:.3e}"
        )
        self.admissible_dt = admissible_dt


class BlowUpError(RuntimeError):
    def __init__(self, t: float, step: int, detail: str = ""):
        super().__init__(f"non-finite state at t={t:.6g} (step {step}) {detail}")
        self.t = t
        self.step = step


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class DimensionalParams:
    nu: float
    lam: float
    rho0: float
    mu0: float
    L: float
    U: float

    def __post_init__(self):
        for name in ("nu", "lam", "rho0", "mu0", "L", "U"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ElsasserParams:
    Re: float
    Rm: float
    alpha: float
    beta: float
    swapped: bool

    @property
    def nu_bar(self) -> float:
        """alpha - beta = min(1/Re, 1/Rm), the effective dissipation."""
        return self.alpha - self.beta


def derive_elsasser_params(Re: float, Rm: float) -> ElsasserParams:
    if Re <= 0 or Rm <= 0:
        raise ValueError(f"Reynolds numbers must be positive, got Re={Re}, Rm={Rm}")
    inv_re, inv_rm = 1.0 / Re, 1.0 / Rm
    alpha = 0.5 * (inv_re + inv_rm)
    beta = abs(0.5 * (inv_re - inv_rm))
    return ElsasserParams(Re, Rm, alpha, beta, swapped=inv_re < inv_rm)


def nondimensionalize(dims: DimensionalParams, f1: np.ndarray, g1: np.ndarray):
    """Dimensional (f1, g1) physical-space forcing -> (ElsasserParams, scale factors).

    Returns (params, f1_nd, g1_nd) where f1_nd = f1 * L/U^2 and
    g1_nd = g1 * L/(U^2 sqrt(rho0 mu0)) are the non-dimensional forcings.
    """
    Re = dims.U * dims.L / dims.nu
    Rm = dims.U * dims.L / dims.lam
    params = derive_elsasser_params(Re, Rm)
    f_scale = dims.L / dims.U ** 2
    g_scale = dims.L / (dims.U ** 2 * np.sqrt(dims.rho0 * dims.mu0))
    return params, np.asarray(f1) * f_scale, np.asarray(g1) * g_scale


# ---------------------------------------------------------------------------
# Elsasser change of variables


def to_elsasser(u: SpectralVectorField, b: SpectralVectorField, swapped: bool):
    if u.grid.n != b.grid.n:
        raise ValueError("u and b live on different grids")
    v = SpectralVectorField(u.grid, u.coef + b.coef, divergence_free=u.divergence_free and b.divergence_free)
    wc = b.coef - u.coef if swapped else u.coef - b.coef
    w = SpectralVectorField(u.grid, wc, divergence_free=u.divergence_free and b.divergence_free)
    return v, w


def from_elsasser(v: SpectralVectorField, w: SpectralVectorField, swapped: bool):
    if v.grid.n != w.grid.n:
        raise ValueError("v and w live on different grids")
    if swapped:
        uc = 0.5 * (v.coef - w.coef)
        bc = 0.5 * (v.coef + w.coef)
    else:
        uc = 0.5 * (v.coef + w.coef)
        bc = 0.5 * (v.coef - w.coef)
    u = SpectralVectorField(v.grid, uc, divergence_free=v.divergence_free and w.divergence_free)
    b = SpectralVectorField(v.grid, bc, divergence_free=v.divergence_free and w.divergence_free)
    return u, b


# ---------------------------------------------------------------------------
# forcing


@dataclass(frozen=True)
class Modulation:
    """Scalar envelope m(t) = offset + amplitude * exp(-rate * t), rate >= 0."""

    amplitude: float
    rate: float
    offset: float

    def __post_init__(self):
        if self.rate < 0:
            raise ValueError("modulation rate must be >= 0")

    def value(self, t: float) -> float:
        return self.offset + self.amplitude * np.exp(-self.rate * t)

    def limsup_abs(self) -> float:
        if self.rate > 0:
            return abs(self.offset)
        return abs(self.offset + self.amplitude)


@dataclass
class ForcingSpec:
    """Elsasser forcing pair (f, g) with an optional time modulation."""

    f: SpectralVectorField
    g: SpectralVectorField
    modulation: Modulation | None = None

    @property
    def kind(self) -> str:
        return "steady-low-mode" if self.modulation is None else "time-modulated"

    def f_coef(self, t: float) -> np.ndarray:
        m = 1.0 if self.modulation is None else self.modulation.value(t)
        return self.f.coef * m

    def g_coef(self, t: float) -> np.ndarray:
        m = 1.0 if self.modulation is None else self.modulation.value(t)
        return self.g.coef * m

    def limsup_norms(self):
        """limsup_t of (||f(t)||, ||g(t)||)."""
        m = 1.0 if self.modulation is None else self.modulation.limsup_abs()
        nf = float(np.sqrt(np.sum(np.abs(self.f.coef) ** 2))) * m
        ng = float(np.sqrt(np.sum(np.abs(self.g.coef) ** 2))) * m
        return nf, ng


def forcing_from_original(f1: SpectralVectorField, g1: SpectralVectorField,
                          modulation: Modulation | None = None) -> ForcingSpec:
    """Relabel original-variable forcing: f = f1 + g1, g = f1 - g1."""
    grid = f1.grid
    f = SpectralVectorField(grid, f1.coef + g1.coef)
    g = SpectralVectorField(grid, f1.coef - g1.coef)
    return ForcingSpec(f, g, modulation)


def grashof_number(forcing: ForcingSpec, params: ElsasserParams) -> float:
    """G = max{Re^2, Rm^2}/pi^2 * limsup_t max{||f+g||, ||f-g||}."""
    m = 1.0 if forcing.modulation is None else forcing.modulation.limsup_abs()
    n_sum = float(np.sqrt(np.sum(np.abs(forcing.f.coef + forcing.g.coef) ** 2))) * m
    n_dif = float(np.sqrt(np.sum(np.abs(forcing.f.coef - forcing.g.coef) ** 2))) * m
    return max(params.Re, params.Rm) ** 2 / np.pi ** 2 * max(n_sum, n_dif)


# ---------------------------------------------------------------------------
# state


@dataclass
class ElsasserState:
    v: SpectralVectorField
    w: SpectralVectorField
    t: float = 0.0

    def copy(self) -> "ElsasserState":
        return ElsasserState(self.v.copy(), self.w.copy(), self.t)


# ---------------------------------------------------------------------------
# right-hand side (used directly by tests; the stepper has its own fused path)


def advection_coef(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(a.grad)b computed pseudo-spectrally with 2/3 dealiasing; raw coefs."""
    n2 = grid.n ** 2
    ad = dealias_coef(grid, a)
    bd = dealias_coef(grid, b)
    fac = 2.0 * np.pi * 1j
    a1 = np.real(np.fft.ifft2(ad[0])) * n2
    a2 = np.real(np.fft.ifft2(ad[1])) * n2
    g1x = np.real(np.fft.ifft2(fac * grid.k1 * bd[0])) * n2
    g1y = np.real(np.fft.ifft2(fac * grid.k2 * bd[0])) * n2
    g2x = np.real(np.fft.ifft2(fac * grid.k1 * bd[1])) * n2
    g2y = np.real(np.fft.ifft2(fac * grid.k2 * bd[1])) * n2
    p1, p2 = _kernels.advect_products(a1, a2, g1x, g1y, g2x, g2y)
    out = np.fft.fft2(np.stack([p1, p2]), axes=(-2, -1)) / n2
    out = dealias_coef(grid, out)
    out[:, 0, 0] = 0.0
    return out


def mhd_rhs(state: ElsasserState, params: ElsasserParams, forcing: ForcingSpec,
            t: float | None = None):
    """Leray-projected right-hand sides (dv/dt, dw/dt) as vector fields."""
    if t is None:
        t = state.t
    grid = state.v.grid
    lap = -FOUR_PI_SQ * grid.ksq
    vc, wc = state.v.coef, state.w.coef
    rv = params.alpha * lap * vc + params.beta * lap * wc
    rw = params.alpha * lap * wc + params.beta * lap * vc
    rv = rv - leray_project_coef(grid, advection_coef(grid, wc, vc))
    rw = rw - leray_project_coef(grid, advection_coef(grid, vc, wc))
    rv = rv + leray_project_coef(grid, forcing.f_coef(t))
    rw = rw + leray_project_coef(grid, forcing.g_coef(t))
    return (
        SpectralVectorField(grid, rv, divergence_free=True),
        SpectralVectorField(grid, rw, divergence_free=True),
    )


# ---------------------------------------------------------------------------
# IMEX stepper


def _diffusion_apply(params: ElsasserParams, ksq: np.ndarray, X: np.ndarray) -> np.ndarray:
    """L X with state X = (v1, v2, w1, w2) stacked along axis 0."""
    kap = FOUR_PI_SQ * ksq
    out = np.empty_like(X)
    out[0] = -kap * (params.alpha * X[0] + params.beta * X[2])
    out[1] = -kap * (params.alpha * X[1] + params.beta * X[3])
    out[2] = -kap * (params.alpha * X[2] + params.beta * X[0])
    out[3] = -kap * (params.alpha * X[3] + params.beta * X[1])
    return out


def _build_implicit_inverse(grid: Grid, params: ElsasserParams, dt: float,
                            damping: np.ndarray | None) -> np.ndarray:
    """(I - dt/2 L + dt*damping)^-1 per mode, flattened to (n*n, 4, 4)."""
    n = grid.n
    kap = FOUR_PI_SQ * grid.ksq.reshape(-1)
    m = n * n
    A = np.zeros((m, 4, 4), dtype=np.complex128)
    idx = np.arange(4)
    A[:, idx, idx] = 1.0
    half = 0.5 * dt
    for i, j, coeff in (
        (0, 0, params.alpha), (1, 1, params.alpha), (2, 2, params.alpha),
        (3, 3, params.alpha), (0, 2, params.beta), (1, 3, params.beta),
        (2, 0, params.beta), (3, 1, params.beta),
    ):
        A[:, i, j] += half * kap * coeff
    if damping is not None:
        A += dt * damping.reshape(m, 4, 4)
    return np.linalg.inv(A)


class MhdStepper:
    """Owns one evolving (v, w) state and advances it with the IMEX scheme.

    `damping` is an optional per-mode (n, n, 4, 4) linear operator added
    implicitly to the left-hand side (used for the nudging self-damping
    term); the matching data term is supplied per step via `extra_plain`.
    """

    def __init__(self, grid: Grid, params: ElsasserParams, forcing: ForcingSpec,
                 dt: float, damping: np.ndarray | None = None,
                 cfl_safety: float = 0.5, check_cfl: bool = True):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.grid = grid
        self.params = params
        self.forcing = forcing
        self.dt = dt
        self.cfl_safety = cfl_safety
        self.check_cfl = check_cfl
        self._ainv = _build_implicit_inverse(grid, params, dt, damping)
        self.X = np.zeros((4, grid.n, grid.n), dtype=np.complex128)
        self.t = 0.0
        self.step_count = 0
        self._prev_expl: np.ndarray | None = None

    # -- state accessors ----------------------------------------------------

    def set_state(self, vcoef: np.ndarray, wcoef: np.ndarray, t: float = 0.0):
        self.X[0], self.X[1] = vcoef[0], vcoef[1]
        self.X[2], self.X[3] = wcoef[0], wcoef[1]
        self.X[:, 0, 0] = 0.0
        self.t = t
        self.step_count = 0
        self._prev_expl = None

    def reset_clock(self):
        self.t = 0.0
        self.step_count = 0

    @property
    def vcoef(self) -> np.ndarray:
        return self.X[:2]

    @property
    def wcoef(self) -> np.ndarray:
        return self.X[2:]

    def state(self) -> ElsasserState:
        return ElsasserState(
            SpectralVectorField(self.grid, self.X[:2].copy(), divergence_free=True),
            SpectralVectorField(self.grid, self.X[2:].copy(), divergence_free=True),
            self.t,
        )

    # -- norms --------------------------------------------------------------

    def norms(self):
        """(l2_v, l2_w, h1_v, h1_w) of the current state."""
        av = np.abs(self.X[:2]) ** 2
        aw = np.abs(self.X[2:]) ** 2
        l2v = np.sqrt(av.sum())
        l2w = np.sqrt(aw.sum())
        h1v = 2.0 * np.pi * np.sqrt((self.grid.ksq * av).sum())
        h1w = 2.0 * np.pi * np.sqrt((self.grid.ksq * aw).sum())
        return float(l2v), float(l2w), float(h1v), float(h1w)

    # -- stepping -----------------------------------------------------------

    def _explicit_terms(self):
        """Advection + projected forcing, plus the physical-space max speed."""
        grid = self.grid
        n2 = grid.n ** 2
        fac = 2.0 * np.pi * 1j
        Xd = dealias_coef(grid, self.X)
        phys = np.real(np.fft.ifft2(Xd, axes=(-2, -1))) * n2
        v1, v2, w1, w2 = phys
        gvx = np.real(np.fft.ifft2(fac * grid.k1 * Xd[:2], axes=(-2, -1))) * n2
        gvy = np.real(np.fft.ifft2(fac * grid.k2 * Xd[:2], axes=(-2, -1))) * n2
        gwx = np.real(np.fft.ifft2(fac * grid.k1 * Xd[2:], axes=(-2, -1))) * n2
        gwy = np.real(np.fft.ifft2(fac * grid.k2 * Xd[2:], axes=(-2, -1))) * n2
        # (w.grad)v and (v.grad)w
        av1, av2 = _kernels.advect_products(w1, w2, gvx[0], gvy[0], gvx[1], gvy[1])
        aw1, aw2 = _kernels.advect_products(v1, v2, gwx[0], gwy[0], gwx[1], gwy[1])
        adv = np.fft.fft2(np.stack([av1, av2, aw1, aw2]), axes=(-2, -1)) / n2
        adv = dealias_coef(grid, adv)
        E = np.empty_like(self.X)
        E[:2] = -leray_project_coef(grid, adv[:2]) + leray_project_coef(
            grid, self.forcing.f_coef(self.t))
        E[2:] = -leray_project_coef(grid, adv[2:]) + leray_project_coef(
            grid, self.forcing.g_coef(self.t))
        speed = max(
            float(np.max(v1 * v1 + v2 * v2)), float(np.max(w1 * w1 + w2 * w2))
        ) ** 0.5
        return E, speed

    def max_admissible_dt(self, speed: float) -> float:
        if speed == 0.0:
            return np.inf
        return self.cfl_safety / (self.grid.n * speed)

    def advance(self, extra_ab: np.ndarray | None = None,
                extra_plain: np.ndarray | None = None):
        """One IMEX step.

        extra_ab joins the Adams-Bashforth-extrapolated explicit terms at
        the current time level; extra_plain is added to the right-hand side
        as-is (used for the implicitly balanced nudging data term).
        """
        E, speed = self._explicit_terms()
        if self.check_cfl:
            adm = self.max_admissible_dt(speed)
            if self.dt > adm:
                raise CflError(self.dt, adm)
        if extra_ab is not None:
            E = E + extra_ab
        if self._prev_expl is None:
            expl = E  # startup Euler step for the multistep part
        else:
            expl = 1.5 * E - 0.5 * self._prev_expl
        self._prev_expl = E
        rhs = self.X + 0.5 * self.dt * _diffusion_apply(
            self.params, self.grid.ksq, self.X) + self.dt * expl
        if extra_plain is not None:
            rhs = rhs + self.dt * extra_plain
        m = self.grid.n ** 2
        sol = _kernels.mode_solve(self._ainv, rhs.reshape(4, m).T.copy())
        self.X = np.ascontiguousarray(sol.T.reshape(4, self.grid.n, self.grid.n))
        self.X[:, 0, 0] = 0.0
        self.t += self.dt
        self.step_count += 1
        if self.step_count % 50 == 0 and not np.isfinite(self.X.view(np.float64)).all():
            raise BlowUpError(self.t, self.step_count)


# ---------------------------------------------------------------------------
# trajectory recording, spin-up, energy budget


@dataclass
class Trajectory:
    """Per-step norm history of a reference run."""

    times: np.ndarray
    l2_v: np.ndarray
    l2_w: np.ndarray
    h1_v: np.ndarray
    h1_w: np.ndarray
    forcing_sq: np.ndarray  # ||f||^2 + ||g||^2 at each time

    def energy(self) -> np.ndarray:
        return self.l2_v ** 2 + self.l2_w ** 2

    def enstrophy(self) -> np.ndarray:
        return self.h1_v ** 2 + self.h1_w ** 2


def record_trajectory(stepper: MhdStepper, n_steps: int) -> Trajectory:
    rows = np.empty((n_steps + 1, 6))
    for i in range(n_steps + 1):
        l2v, l2w, h1v, h1w = stepper.norms()
        fc = stepper.forcing.f_coef(stepper.t)
        gc = stepper.forcing.g_coef(stepper.t)
        f2 = float(np.sum(np.abs(fc) ** 2) + np.sum(np.abs(gc) ** 2))
        rows[i] = (stepper.t, l2v, l2w, h1v, h1w, f2)
        if i < n_steps:
            stepper.advance()
    return Trajectory(rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4],
                      rows[:, 5])


def energy_budget(traj: Trajectory, params: ElsasserParams,
                  tol_factor: float = 1e-6):
    """Discrete residuals of the L2 energy inequality

        d/dt(|v|^2+|w|^2) + (a-b)(|grad v|^2+|grad w|^2)
            <= (||f||^2+||g||^2) / (4 pi^2 (a-b)).

    Returns (residuals, flags) over interior samples; a flagged residual
    exceeds tol_factor * max(1, ||f||^2+||g||^2).
    """
    if len(traj.times) < 3:
        raise ValueError("energy budget needs at least 3 samples")
    nub = params.nu_bar
    E = traj.energy()
    H = traj.enstrophy()
    dt = np.diff(traj.times)
    # centered difference on interior points
    dEdt = (E[2:] - E[:-2]) / (traj.times[2:] - traj.times[:-2])
    lhs = dEdt + nub * H[1:-1]
    rhs = traj.forcing_sq[1:-1] / (FOUR_PI_SQ * nub)
    residuals = lhs - rhs
    tol = tol_factor * np.maximum(1.0, traj.forcing_sq[1:-1])
    return residuals, residuals > tol


def spin_up(stepper: MhdStepper, tol: float = 0.01, max_time: float = 60.0,
            min_windows: int = 2) -> float:
    """Integrate until the windowed average of the total enstrophy settles.

    Window length is T = 1/(pi^2 (alpha-beta)); stops when consecutive
    window averages differ by less than `tol` relative.  Returns the spin-up
    time spent; the stepper clock is reset to 0 afterwards.
    """
    T = 1.0 / (np.pi ** 2 * stepper.params.nu_bar)
    steps_per_window = max(int(round(T / stepper.dt)), 8)
    prev_avg = None
    elapsed = 0.0
    windows = 0
    while elapsed < max_time:
        acc = 0.0
        for _ in range(steps_per_window):
            stepper.advance()
            _, _, h1v, h1w = stepper.norms()
            acc += h1v ** 2 + h1w ** 2
        elapsed += steps_per_window * stepper.dt
        avg = acc / steps_per_window
        windows += 1
        if prev_avg is not None and windows >= min_windows:
            if abs(avg - prev_avg) <= tol * max(prev_avg, 1e-14):
                break
        prev_avg = avg
    spent = elapsed
    stepper.reset_clock()
    return spent
