"""Finite-difference cross-check of the series solution.

The free Schrodinger equation on [0, l(t)] is mapped to the fixed interval
y = x / l(t) in [0, 1], where it reads

    i hbar phi_t = -(hbar^2 / (2 m l^2)) phi_yy + i hbar (u y / l) phi_y.

The solver advances chi = sqrt(l) phi, which removes the non-Hermitian part
of the advection term, so the implicit-midpoint step conserves
l * sum |phi|^2 dy up to round-off. Space uses centred differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import GridSolveError, InvalidArgumentError
from .numerics import QuadratureSpec
from .spectral import InitialState, PhysicsConfig, SpectralState, evaluate_grid, initial_amplitude


@dataclass(frozen=True)
class GridConfig:
    points: int = 2000
    dt: float = 1e-8
    scheme: str = "implicit-midpoint"

    def __post_init__(self):
        if int(self.points) != self.points or self.points < 100:
            raise InvalidArgumentError(f"grid needs at least 100 interior points, got {self.points}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise InvalidArgumentError(f"grid dt must be positive, got {self.dt}")
        if self.scheme != "implicit-midpoint":
            raise InvalidArgumentError(f"unknown scheme {self.scheme!r}")

    @property
    def h(self) -> float:
        return 1.0 / (self.points + 1)

    def y(self) -> np.ndarray:
        y = self.h * np.arange(self.points + 2)
        y[-1] = 1.0
        return y

    def refined(self) -> "GridConfig":
        return GridConfig(2 * self.points + 1, self.dt / 2)


@dataclass(frozen=True)
class GridState:
    """Amplitudes phi on y_j = j / (points + 1), both Dirichlet ends included."""

    t: float
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.size < 3:
            raise InvalidArgumentError("GridState needs a 1-D array with interior points")
        if a[0] != 0 or a[-1] != 0:
            raise InvalidArgumentError("GridState boundary values must be exactly zero")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def points(self) -> int:
        return self.amplitudes.size - 2

    def x(self, physics: PhysicsConfig) -> np.ndarray:
        ell = physics.ell(self.t)
        n = self.amplitudes.size - 1
        x = ell / n * np.arange(n + 1)
        x[-1] = ell
        return x

    def norm(self, physics: PhysicsConfig) -> float:
        """l(t) * sum |phi|^2 dy (the ends are zero, so this is also the trapezoid rule)."""
        return physics.ell(self.t) * float(np.sum(np.abs(self.amplitudes) ** 2)) / (self.amplitudes.size - 1)


def initial_grid(state: InitialState, grid: GridConfig, physics: PhysicsConfig) -> GridState:
    """Sample the initial amplitude directly, independent of the series path."""
    x = grid.y() * physics.ell0
    phi = np.asarray(initial_amplitude(InitialState(state), physics, x), dtype=complex)
    phi[0] = phi[-1] = 0.0
    return GridState(0.0, phi)


class _Bands:
    """Tridiagonal H for chi: kinetic part plus the antisymmetrised advection.

    Only the two scalar prefactors depend on time, through l(t).
    """

    def __init__(self, grid: GridConfig, physics: PhysicsConfig):
        self.grid, self.physics = grid, physics
        y = grid.y()
        self.ysum = y[1:-2] + y[2:-1]

    def __call__(self, t_mid: float):
        p = self.physics
        ell = p.ell(t_mid)
        h = self.grid.h
        kin = p.hbar**2 / (2 * p.mass * ell * ell * h * h)
        adv = 1j * p.hbar * p.u / ell / (4 * h) * self.ysum
        return -kin - adv, 2 * kin, -kin + adv


def transform_equation_step(state: GridState, grid: GridConfig, physics: PhysicsConfig) -> GridState:
    """One implicit-midpoint step of length ``grid.dt``."""
    if state.points != grid.points:
        raise InvalidArgumentError("state and grid disagree on the point count")
    physics.check_time(state.t + grid.dt)
    return _advance(state, grid, physics, 1, state.t)


def _advance(state: GridState, grid: GridConfig, physics: PhysicsConfig, steps: int,
             t_start: float) -> GridState:
    dt = grid.dt
    f = 0.5j * dt / physics.hbar
    bands = _Bands(grid, physics)
    chi = math.sqrt(physics.ell(state.t)) * np.array(state.amplitudes[1:-1])
    for i in range(steps):
        ta = t_start + i * dt
        lo, di, up = bands(ta + 0.5 * dt)
        flo, fup = f * lo, f * up
        rhs = (1 - f * di) * chi
        rhs[1:] -= flo * chi[:-1]
        rhs[:-1] -= fup * chi[1:]
        diag = np.full(chi.size, 1 + f * di)
        _, _, _, sol, info = lapack.zgtsv(flo, diag, fup, rhs, overwrite_dl=1, overwrite_d=1,
                                          overwrite_du=1, overwrite_b=1)
        if info != 0:
            raise GridSolveError(f"tridiagonal solve failed (info={info}) at t={ta}")
        chi = sol
    if not np.all(np.isfinite(chi)):
        raise GridSolveError(f"grid solution became non-finite between t={t_start} and t={ta + dt}")
    t_end = t_start + steps * dt
    phi = np.zeros(chi.size + 2, dtype=complex)
    phi[1:-1] = chi / math.sqrt(physics.ell(t_end))
    return GridState(t_end, phi)


def evolve(state: GridState, grid: GridConfig, physics: PhysicsConfig, t_end: float) -> GridState:
    """Advance to ``t_end`` with a whole number of steps (the last lands on t_end)."""
    if t_end < state.t:
        raise InvalidArgumentError("cannot evolve backwards")
    physics.check_time(t_end)
    steps = int(round((t_end - state.t) / grid.dt))
    if steps == 0:
        return state
    if abs(state.t + steps * grid.dt - t_end) > 1e-9 * grid.dt + 1e-15:
        raise InvalidArgumentError(f"t_end - t={t_end - state.t} is not a multiple of dt={grid.dt}")
    out = _advance(state, grid, physics, steps, state.t)
    return GridState(t_end, out.amplitudes)


def solve(state: InitialState, grid: GridConfig, physics: PhysicsConfig, t_end: float) -> GridState:
    return evolve(initial_grid(state, grid, physics), grid, physics, t_end)


def compare(spec: SpectralState, grid: GridState, q: QuadratureSpec | None = None,
            t: float | None = None) -> tuple[float, float]:
    """(l2_error, linf_error) of the grid solution against the series.

    Both are relative: the L2 discrepancy over the L2 norm of the series, and
    the largest pointwise difference over max |psi|. ``q`` is accepted for
    interface symmetry; the comparison runs on the grid's own abscissae.
    """
    if t is not None and t != grid.t:
        raise InvalidArgumentError(f"time mismatch: requested t={t}, grid is at t={grid.t}")
    ref = evaluate_grid(spec, grid.t, grid.amplitudes.size - 1).psi
    diff = grid.amplitudes - ref
    denom = float(np.sum(np.abs(ref) ** 2))
    if denom == 0.0:
        raise InvalidArgumentError("compare: reference wavefunction vanishes identically")
    l2 = math.sqrt(float(np.sum(np.abs(diff) ** 2)) / denom)
    linf = float(np.max(np.abs(diff))) / float(np.max(np.abs(ref)))
    return l2, linf


@dataclass(frozen=True)
class ConvergenceStudy:
    grids: tuple[GridConfig, ...]
    self_errors: tuple[float, ...]  # each level against the finest
    ratios: tuple[float, ...]
    spectral_errors: tuple[float, ...]
    norm_drift: float  # finest level, relative

    def converged(self, factor: float = 3.0, plateau: float = 1e-12) -> bool:
        """Every refinement gains ``factor`` unless the error already sits at ``plateau``."""
        errs = self.self_errors
        for a, b in zip(errs[:-1], errs[1:]):
            if b > plateau and a / b < factor:
                return False
        return True


def _restrict(fine: GridState, coarse_points: int) -> np.ndarray:
    stride = (fine.amplitudes.size - 1) // (coarse_points + 1)
    return fine.amplitudes[::stride]


def convergence_study(spec: SpectralState, base: GridConfig, t_end: float,
                      levels: int = 3) -> ConvergenceStudy:
    """Run ``levels`` grids (points 2n+1, dt/2 each time) and compare them.

    Refined grids nest exactly in the coarse ones, so the self-convergence
    errors are taken on the coarse nodes without interpolation.
    """
    if levels < 2:
        raise InvalidArgumentError("a convergence study needs at least two levels")
    cfg = spec.config
    grids = [base]
    for _ in range(levels - 1):
        grids.append(grids[-1].refined())
    runs = [solve(spec.state_kind, g, cfg, t_end) for g in grids]
    finest = runs[-1]
    self_err = []
    for g, r in zip(grids[:-1], runs[:-1]):
        ref = _restrict(finest, g.points)
        self_err.append(math.sqrt(float(np.sum(np.abs(r.amplitudes - ref) ** 2))
                                  / float(np.sum(np.abs(ref) ** 2))))
    ratios = tuple(a / b for a, b in zip(self_err[:-1], self_err[1:]) if b > 0)
    spectral = tuple(compare(spec, r)[0] for r in runs)
    g0 = initial_grid(spec.state_kind, grids[-1], cfg).norm(cfg)
    drift = abs(finest.norm(cfg) - g0) / g0
    return ConvergenceStudy(tuple(grids), tuple(self_err), ratios, spectral, drift)
