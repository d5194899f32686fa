"""Expectation values, quantum potential and the quantum effective force.

The force is the rate of change of <p>. For wavefunctions that vanish at
both walls it reduces to a difference of squared wall slopes; two general
boundary forms (Bohmian and standard) are provided as well, written against
:class:`WaveSample` so they also accept fields that do not vanish at the walls.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidArgumentError, NumericConsistencyError
from .numerics import QuadratureSpec, TimeSeries, cumulative_integral, simpson_nodes
from .spectral import (SpectralState, WaveSample, evaluate, evaluate_grid, polar_fields,
                       wall_samples)

SPATIAL_QUADRATURE = QuadratureSpec(65536)
P_IMAG_TOLERANCE = 1e-8
ONSET_FRACTION = 0.05


class ForceFormulation(str, enum.Enum):
    BOUNDARY = "boundary"
    GENERAL_BOHM = "general-bohm"
    GENERAL_QM = "general-qm"


def _grid_sample(spec: SpectralState, t: float, q: QuadratureSpec):
    ell = spec.config.ell(t)
    _, w = simpson_nodes(0.0, ell, q)
    return evaluate_grid(spec, t, q.panels), w


def norm(spec: SpectralState, t: float, q: QuadratureSpec = SPATIAL_QUADRATURE) -> float:
    s, w = _grid_sample(spec, t, q)
    return float(np.sum(w * np.abs(s.psi) ** 2))


def x_expectation(spec: SpectralState, t: float, q: QuadratureSpec = SPATIAL_QUADRATURE,
                  normalized: bool = True) -> float:
    """<x>(t). With ``normalized=False`` the raw integral int x |psi|^2 dx is returned."""
    s, w = _grid_sample(spec, t, q)
    rho = w * np.abs(s.psi) ** 2
    raw = float(np.sum(s.x * rho))
    return raw / float(np.sum(rho)) if normalized else raw


def p_expectation(spec: SpectralState, t: float, q: QuadratureSpec = SPATIAL_QUADRATURE,
                  normalized: bool = True) -> float:
    s, w = _grid_sample(spec, t, q)
    hbar = spec.config.hbar
    val = -1j * hbar * np.sum(w * np.conj(s.psi) * s.dpsi)
    if abs(val.imag) >= P_IMAG_TOLERANCE:
        raise NumericConsistencyError(
            f"<p> has imaginary residual {val.imag:.3e} at t={t}")
    if not normalized:
        return float(val.real)
    return float(val.real) / float(np.sum(w * np.abs(s.psi) ** 2))


def quantum_potential(spec: SpectralState, x, t: float):
    s = evaluate(spec, x, t)
    pf = polar_fields(s, spec.config.hbar, spec.node_floor(t))
    out = -(spec.config.hbar**2 / (2 * spec.config.mass)) * pf.d2R / pf.R
    return float(out) if np.ndim(out) == 0 else out


def _wall_speed(spec: SpectralState) -> float:
    return spec.config.u


def force_boundary(spec: SpectralState, t: float) -> float:
    left, right = wall_samples(spec, t)
    c = spec.config.hbar**2 / (2 * spec.config.mass)
    return float(-c * (abs(right.dpsi) ** 2 - abs(left.dpsi) ** 2))


def force_general_qm_samples(left: WaveSample, right: WaveSample, wall_speed: float,
                             hbar: float, mass: float) -> float:
    """hbar l' Im(psi* psi')|_l + (hbar^2/2m)[Re(psi* psi'') - |psi'|^2]_0^l."""
    def bracket(s):
        return (np.conj(s.psi) * s.d2psi).real - abs(s.dpsi) ** 2

    moving = hbar * wall_speed * (np.conj(right.psi) * right.dpsi).imag
    out = moving + hbar**2 / (2 * mass) * (bracket(right) - bracket(left))
    if not np.isfinite(out):
        raise NumericConsistencyError("general QM force is not finite")
    return float(out)


def _bohm_wall_terms(s: WaveSample, hbar: float, floor: float):
    """(R^2 S', R R'' - R'^2, (R S')^2) at a wall, with limits where R vanishes."""
    cross = np.conj(s.psi) * s.dpsi
    slope2 = abs(s.dpsi) ** 2
    r2 = abs(s.psi) ** 2
    flux = hbar * cross.imag
    if math.sqrt(r2) <= floor:
        # psi ~ psi'(w) (x - w): R'^2 -> |psi'|^2, R R'' -> 0, R S' -> 0
        return flux, -slope2, 0.0
    dR2 = cross.real**2 / r2
    curvature = slope2 + (np.conj(s.psi) * s.d2psi).real - dR2
    return flux, curvature - dR2, flux**2 / r2


def force_general_bohm_samples(left: WaveSample, right: WaveSample, wall_speed: float,
                               hbar: float, mass: float, floor: float = 0.0) -> float:
    """l' (R^2 S')|_l + [(hbar^2/2m)(R R'' - R'^2) - (R S')^2/m]_0^l."""
    flux_r, curv_r, kin_r = _bohm_wall_terms(right, hbar, floor)
    _, curv_l, kin_l = _bohm_wall_terms(left, hbar, floor)
    out = wall_speed * flux_r + (hbar**2 / (2 * mass) * (curv_r - curv_l)
                                 - (kin_r - kin_l) / mass)
    if not np.isfinite(out):
        raise NumericConsistencyError("general Bohm force is not finite")
    return float(out)


def force_general_qm(spec: SpectralState, t: float) -> float:
    left, right = wall_samples(spec, t)
    cfg = spec.config
    return force_general_qm_samples(left, right, _wall_speed(spec), cfg.hbar, cfg.mass)


def force_general_bohm(spec: SpectralState, t: float) -> float:
    left, right = wall_samples(spec, t)
    cfg = spec.config
    return force_general_bohm_samples(left, right, _wall_speed(spec), cfg.hbar, cfg.mass,
                                      spec.node_floor(t))


_FORCES = {
    ForceFormulation.BOUNDARY: force_boundary,
    ForceFormulation.GENERAL_BOHM: force_general_bohm,
    ForceFormulation.GENERAL_QM: force_general_qm,
}


def force(spec: SpectralState, t: float,
          formulation: ForceFormulation | str = ForceFormulation.BOUNDARY) -> float:
    return _FORCES[ForceFormulation(formulation)](spec, t)


def force_series(spec: SpectralState, times: Sequence[float],
                 formulation: ForceFormulation | str = ForceFormulation.BOUNDARY) -> TimeSeries:
    fn = _FORCES[ForceFormulation(formulation)]
    vals = np.array([fn(spec, float(t)) for t in times])
    return TimeSeries(np.asarray(times, dtype=float), vals,
                      {"quantity": "f_qm", "formulation": ForceFormulation(formulation).value})


def momentum_from_force(force_ts: TimeSeries, p0: float) -> TimeSeries:
    """<p>(t) = <p>(t0) + int_t0^t f_qm dt, trapezoid on the force grid."""
    acc = cumulative_integral(force_ts)
    return TimeSeries(acc.times, p0 + acc.values, {**acc.meta, "quantity": "p_mean", "p0": p0})


def deviation_onset(dynamic: TimeSeries, static: TimeSeries,
                    fraction: float = ONSET_FRACTION) -> float | None:
    """First time |f_dynamic - f_static| exceeds ``fraction`` of max |f_dynamic|.

    Returns None if the threshold is never crossed (including an all-zero
    dynamic series).
    """
    if not np.array_equal(dynamic.times, static.times):
        raise InvalidArgumentError("deviation_onset: series must share a time grid")
    peak = float(np.max(np.abs(dynamic.values)))
    if peak == 0.0:
        return None
    over = np.abs(dynamic.values - static.values) > fraction * peak
    if not np.any(over):
        return None
    return float(dynamic.times[int(np.argmax(over))])


def first_excursion_sign(series: TimeSeries, fraction: float = ONSET_FRACTION,
                         floor: float = 0.0) -> int:
    """Sign of the first sample whose magnitude exceeds ``fraction`` of the peak.

    Returns 0 when the peak does not rise above ``floor``, so a series that is
    zero up to round-off has no excursion.
    """
    vals = series.values
    peak = float(np.max(np.abs(vals)))
    if peak <= floor or peak == 0.0:
        return 0
    idx = np.flatnonzero(np.abs(vals) > fraction * peak)
    return int(np.sign(vals[idx[0]])) if idx.size else 0


@dataclass(frozen=True)
class ObservableReport:
    norm: TimeSeries
    x_mean: TimeSeries
    p_mean: TimeSeries
    force: dict[str, TimeSeries] = field(default_factory=dict)


def observable_report(spec: SpectralState, times: Sequence[float],
                      q: QuadratureSpec = SPATIAL_QUADRATURE,
                      formulations: Iterable[ForceFormulation | str] = (ForceFormulation.BOUNDARY,)
                      ) -> ObservableReport:
    times = np.asarray(times, dtype=float)
    hbar = spec.config.hbar
    norms, xs, ps = [], [], []
    for t in times:
        s, w = _grid_sample(spec, float(t), q)
        rho = w * np.abs(s.psi) ** 2
        nrm = float(np.sum(rho))
        pv = -1j * hbar * np.sum(w * np.conj(s.psi) * s.dpsi)
        if abs(pv.imag) >= P_IMAG_TOLERANCE:
            raise NumericConsistencyError(f"<p> has imaginary residual {pv.imag:.3e} at t={t}")
        norms.append(nrm)
        xs.append(float(np.sum(s.x * rho)) / nrm)
        ps.append(float(pv.real) / nrm)
    forces = {ForceFormulation(f).value: force_series(spec, times, f) for f in formulations}
    return ObservableReport(TimeSeries(times, norms, {"quantity": "norm"}),
                            TimeSeries(times, xs, {"quantity": "x_mean"}),
                            TimeSeries(times, ps, {"quantity": "p_mean"}),
                            forces)
