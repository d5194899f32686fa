"""Numeric kernel: complex error functions, Simpson quadrature, cumulative
integration and a classical RK4 stepper.

The error function is evaluated through three regimes selected by modulus:
a Maclaurin series near the origin, Weideman's rational approximation of the
Faddeeva function w(z) = exp(-z^2) erfc(-iz) at intermediate range, and the
Laplace continued fraction for w at large |z|. Only the first quadrant is
computed directly; odd and conjugate symmetry are applied afterwards so they
hold bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidArgumentError, NumericRangeError, SingularityError

SQRT_PI = math.sqrt(math.pi)

_SERIES_RADIUS = 2.0
_CF_RADIUS = 6.0
_CF_DEPTH = 24
_WEIDEMAN_N = 40
_SERIES_TERMS = 48


def _weideman_coefficients(n: int) -> tuple[float, np.ndarray]:
    m = 2 * n
    k = np.arange(-m + 1, m)
    scale = math.sqrt(n / math.sqrt(2.0))
    t = scale * np.tan(0.5 * k * math.pi / m)
    f = np.concatenate(([0.0], np.exp(-t * t) * (scale * scale + t * t)))
    a = np.real(np.fft.fft(np.fft.fftshift(f))) / (2 * m)
    return scale, a[1 : n + 1][::-1].copy()


_W_SCALE, _W_COEFFS = _weideman_coefficients(_WEIDEMAN_N)


def faddeeva(z):
    """Faddeeva function w(z) for Im(z) >= 0.

    The lower half plane is not needed by anything in this package and is
    rejected rather than silently continued.
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise InvalidArgumentError("faddeeva: non-finite argument")
    if np.any(z.imag < 0):
        raise InvalidArgumentError("faddeeva: argument must satisfy Im(z) >= 0")
    out = np.empty_like(z)
    far = np.abs(z) >= _CF_RADIUS
    if np.any(far):
        zf = z[far]
        r = np.zeros_like(zf)
        for k in range(_CF_DEPTH, 0, -1):
            r = (0.5 * k) / (zf - r)
        out[far] = (1j / SQRT_PI) / (zf - r)
    near = ~far
    if np.any(near):
        zn = z[near]
        denom = _W_SCALE - 1j * zn
        p = np.polyval(_W_COEFFS, (_W_SCALE + 1j * zn) / denom)
        out[near] = 2.0 * p / denom**2 + (1.0 / SQRT_PI) / denom
    return out


def _erf_series(z: np.ndarray) -> np.ndarray:
    z2 = -z * z
    term = z.copy()
    acc = z.copy()
    for n in range(1, _SERIES_TERMS):
        term = term * z2 / n
        acc = acc + term / (2 * n + 1)
    return (2.0 / SQRT_PI) * acc


def _erf_upper_right(z: np.ndarray) -> np.ndarray:
    # Re z >= 0 and Im z >= 0.
    out = np.empty_like(z)
    small = np.abs(z) <= _SERIES_RADIUS
    if np.any(small):
        out[small] = _erf_series(z[small])
    big = ~small
    if np.any(big):
        zb = z[big]
        with np.errstate(over="ignore", invalid="ignore"):
            out[big] = 1.0 - np.exp(-zb * zb) * faddeeva(1j * zb)
    return out


def cerf(z):
    """Error function of a complex argument.

    Accepts scalars or arrays; returns the same shape. Raises
    :class:`NumericRangeError` when the true value is not representable.
    """
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("cerf: non-finite argument")
    flat = arr.reshape(-1)
    negate = flat.real < 0
    zr = np.where(negate, -flat, flat)
    lower = zr.imag < 0
    zq = np.where(lower, np.conj(zr), zr)
    val = _erf_upper_right(zq)
    with np.errstate(invalid="ignore"):
        val = np.where(lower, np.conj(val), val)
        val = np.where(negate, -val, val)
        # real in, real out; imaginary in, imaginary out
        val = np.where(flat.imag == 0, val.real + 0j, val)
        val = np.where(flat.real == 0, 1j * val.imag, val)
    if not np.all(np.isfinite(val)):
        raise NumericRangeError("cerf: result overflows double precision")
    val = val.reshape(arr.shape)
    return complex(val) if val.ndim == 0 else val


def cerfi(z):
    """Imaginary error function, Erfi(z) = -i Erf(iz)."""
    arr = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("cerfi: non-finite argument")
    val = -1j * np.asarray(cerf(1j * arr))
    return complex(val) if val.ndim == 0 else val


def _erf_tail(log_scale: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split exp(L) erf(z) into exp(L)*s and -s*exp(L - z^2)*w(i s z), s = sign Re z."""
    s = np.where(z.real >= 0, 1.0, -1.0)
    with np.errstate(over="ignore", invalid="ignore"):
        tail = -s * np.exp(log_scale - z * z) * faddeeva(1j * s * z)
    return s, tail


def scaled_erf_difference(log_scale, upper, lower):
    """exp(log_scale) * (erf(upper) - erf(lower)) without intermediate overflow.

    The exponential prefactor is folded into each erfc tail before
    multiplication; the constant parts cancel exactly when both arguments lie
    in the same half plane.
    """
    log_scale = np.asarray(log_scale, dtype=complex)
    upper = np.asarray(upper, dtype=complex)
    lower = np.asarray(lower, dtype=complex)
    log_scale, upper, lower = np.broadcast_arrays(log_scale, upper, lower)
    su, tu = _erf_tail(log_scale, upper)
    sl, tl = _erf_tail(log_scale, lower)
    jump = su - sl
    with np.errstate(over="ignore", invalid="ignore"):
        const = np.where(jump != 0, jump * np.exp(log_scale), 0.0)
        out = const + tu - tl
    if not np.all(np.isfinite(out)):
        raise NumericRangeError("scaled_erf_difference: overflow despite balancing")
    return out


@dataclass(frozen=True)
class QuadratureSpec:
    panels: int = 2000

    def __post_init__(self):
        if int(self.panels) != self.panels or self.panels < 2 or self.panels % 2:
            raise InvalidArgumentError(f"Simpson needs an even panel count >= 2, got {self.panels}")

    def refined(self, factor: int = 2) -> "QuadratureSpec":
        return QuadratureSpec(self.panels * factor)


def simpson_nodes(a: float, b: float, spec: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the composite Simpson rule on [a, b]."""
    if not (math.isfinite(a) and math.isfinite(b)):
        raise InvalidArgumentError("simpson: non-finite bounds")
    if a > b:
        raise InvalidArgumentError(f"simpson: a={a} > b={b}")
    n = spec.panels
    # step from the interval, not from node differences (cancellation)
    h = (b - a) / n
    x = a + h * np.arange(n + 1)
    x[-1] = b
    w = np.full(n + 1, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return x, w * (h / 3.0)


def simpson(integrand: Callable[[np.ndarray], np.ndarray], a: float, b: float,
            spec: QuadratureSpec = QuadratureSpec()):
    x, w = simpson_nodes(a, b, spec)
    y = np.asarray(integrand(x))
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape)
    return np.sum(w * y)


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.asarray(self.values)
        if t.ndim != 1 or v.shape != t.shape:
            raise InvalidArgumentError("TimeSeries: times and values must be 1-D and equal length")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise InvalidArgumentError("TimeSeries: times must be strictly increasing")
        t.setflags(write=False)
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self) -> int:
        return self.times.size


def cumulative_integral(series: TimeSeries) -> TimeSeries:
    """Running trapezoid integral of ``series``; the first value is 0."""
    if len(series) < 2:
        raise InvalidArgumentError("cumulative_integral needs at least 2 samples")
    t, v = series.times, series.values
    steps = 0.5 * (v[1:] + v[:-1]) * np.diff(t)
    out = np.concatenate(([0.0], np.cumsum(steps)))
    return TimeSeries(t, out, {**series.meta, "integration": "trapezoid"})


def rk4_step(velocity: Callable[[float, float], float], t: float, x: float, dt: float) -> float:
    if not dt > 0:
        raise InvalidArgumentError(f"rk4_step: dt must be positive, got {dt}")

    def stage(ts, xs):
        v = velocity(ts, xs)
        if not math.isfinite(v):
            raise SingularityError("non-finite velocity", ts, xs)
        return v

    k1 = stage(t, x)
    k2 = stage(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = stage(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = stage(t + dt, x + dt * k3)
    return x + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
