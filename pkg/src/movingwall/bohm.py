"""Bohmian trajectories dx/dt = (hbar/m) Im(psi* psi') / |psi|^2 over the
exact series wavefield."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidArgumentError, NodeSingularityError, SingularityError
from .numerics import rk4_step
from .spectral import SpectralState

DEFAULT_DT = 1e-7
MAX_HALVINGS = 6  # dt / 64


class TrajectoryStatus(str, enum.Enum):
    COMPLETED = "completed"
    NODE_ABORTED = "node-aborted"
    WALL_CLAMPED = "wall-clamped"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    x0: float
    status: TrajectoryStatus
    message: str = ""

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class EnsembleSpec:
    starts: tuple[float, ...]
    t_end: float
    dt: float = DEFAULT_DT

    def __post_init__(self):
        object.__setattr__(self, "starts", tuple(float(s) for s in self.starts))
        if not self.dt > 0:
            raise InvalidArgumentError("ensemble dt must be positive")


class _GuidanceField:
    """Scalar psi/psi' evaluation with the phased coefficients memoised per time.

    RK4 hits each stage time twice, and consecutive steps share endpoints.
    """

    def __init__(self, spec: SpectralState):
        self.spec = spec
        cfg = spec.config
        self.hbar_over_m = cfg.hbar / cfg.mass
        self._alt = np.where(np.arange(spec.n_terms) % 2 == 0, 1.0, -1.0)
        self._cache: dict[float, tuple] = {}

    def _at(self, t: float):
        hit = self._cache.get(t)
        if hit is None:
            ell, kn, c = self.spec.phased_coefficients(t)
            hit = (ell, kn, c, c * kn, self.spec.node_floor(t))
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[t] = hit
        return hit

    def velocity(self, t: float, x: float) -> float:
        ell, kn, c, ck, floor = self._at(t)
        if not 0.0 < x < ell:
            raise _LeftBox(t, x)
        right = x > 0.5 * ell
        y = ell - x if right else x
        arg = kn * y
        s = np.sin(arg)
        co = np.cos(arg)
        if right:
            s = s * self._alt
            co = co * -self._alt
        g = s @ c
        g1 = co @ ck
        # the chirp and 2/sqrt(l0 l) cancel in Im(psi* psi')/|psi|^2 except for the
        # chirp gradient 2 beta x
        mag2 = g.real * g.real + g.imag * g.imag
        scale = 2.0 / math.sqrt(self.spec.config.ell0 * ell)
        if math.sqrt(mag2) * scale <= floor:
            raise NodeSingularityError("wavefunction node", t, x)
        cfg = self.spec.config
        beta = cfg.mass * cfg.u / (2 * cfg.hbar * ell)
        im = (g.real * g1.imag - g.imag * g1.real) / mag2
        return self.hbar_over_m * (2.0 * beta * x + im)


class _LeftBox(Exception):
    def __init__(self, t, x):
        self.t, self.x = t, x


def velocity(spec: SpectralState, x: float, t: float) -> float:
    ell = spec.config.ell(t)
    if not 0.0 < x < ell:
        raise InvalidArgumentError(f"velocity: x={x} not inside (0, {ell})")
    return _GuidanceField(spec).velocity(t, x)


def integrate_trajectory(spec: SpectralState, x0: float, t_end: float, dt: float = DEFAULT_DT,
                         t0: float = 0.0) -> Trajectory:
    """RK4 integration of the guidance equation, sampled every ``dt``.

    A step that leaves the box is retried with halved sub-steps down to dt/64;
    beyond that the trajectory stops as wall-clamped. Hitting a node stops it
    as node-aborted. Neither condition raises.
    """
    cfg = spec.config
    ell0 = cfg.ell(t0)
    if not 0.0 < x0 < ell0:
        raise InvalidArgumentError(f"x0={x0} must lie strictly inside (0, {ell0})")
    if not dt > 0:
        raise InvalidArgumentError("dt must be positive")
    if t_end < t0:
        raise InvalidArgumentError("t_end must not precede t0")
    cfg.check_time(t_end)
    n_steps = int(round((t_end - t0) / dt))
    field_ = _GuidanceField(spec)
    times = [t0]
    xs = [x0]
    status, message = TrajectoryStatus.COMPLETED, ""
    x = x0
    for i in range(n_steps):
        ta = t0 + i * dt
        tb = t0 + (i + 1) * dt if i + 1 < n_steps else t_end
        try:
            x = _advance(field_, ta, tb, x)
        except NodeSingularityError as exc:
            status, message = TrajectoryStatus.NODE_ABORTED, str(exc)
            break
        except _WallClamp as exc:
            status, message = TrajectoryStatus.WALL_CLAMPED, str(exc)
            break
        times.append(tb)
        xs.append(x)
    return Trajectory(np.array(times), np.array(xs), float(x0), status, message)


class _WallClamp(Exception):
    pass


def _advance(field_: _GuidanceField, ta: float, tb: float, x: float) -> float:
    ell_b = field_.spec.config.ell(tb)
    for halving in range(MAX_HALVINGS + 1):
        pieces = 2**halving
        h = (tb - ta) / pieces
        xi = x
        try:
            for j in range(pieces):
                ts = ta + j * h
                xi = rk4_step(field_.velocity, ts, xi, h)
                if not 0.0 < xi < field_.spec.config.ell(ts + h):
                    raise _LeftBox(ts + h, xi)
        except (_LeftBox, SingularityError) as exc:
            if isinstance(exc, NodeSingularityError):
                raise
            continue
        if 0.0 < xi < ell_b:
            return xi
    raise _WallClamp(f"step from t={ta} left the box even at dt/{2**MAX_HALVINGS}")


def ensemble(spec: SpectralState, es: EnsembleSpec, workers: int = 1) -> list[Trajectory]:
    """Independent trajectories, returned in the order of ``es.starts``."""
    def run(x0):
        return integrate_trajectory(spec, x0, es.t_end, es.dt)

    if workers <= 1 or len(es.starts) <= 1:
        return [run(x0) for x0 in es.starts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, es.starts))


def fig2_starts(spec: SpectralState) -> tuple[float, float, float]:
    cfg = spec.config
    return (cfg.xc - 2 * cfg.sigma0, cfg.xc, cfg.xc + 2 * cfg.sigma0)


def sample_at(traj: Trajectory, times: Sequence[float]) -> np.ndarray:
    """Positions at ``times`` by linear interpolation (NaN after the trajectory stops)."""
    times = np.asarray(times, dtype=float)
    out = np.interp(times, traj.times, traj.positions)
    out[times > traj.times[-1]] = np.nan
    return out
