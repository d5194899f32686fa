"""Exact series solution for a box [0, l(t)] whose right wall moves as
l(t) = l0 + u t.

Each mode

    (2 / sqrt(l0 l)) exp(i m u x^2 / (2 hbar l)) exp(-i n^2 pi^2 hbar t / (2 m l0 l)) sin(n pi x / l)

solves the free Schroedinger equation with Dirichlet walls exactly, so a state
is fully described by its expansion coefficients f_n, computed once from the
initial amplitude.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import scipy.fft

from .errors import (
    DomainExpiredError,
    InvalidArgumentError,
    NodeSingularityError,
    NumericRangeError,
    UnsupportedMethodError,
)
from .numerics import QuadratureSpec, scaled_erf_difference, simpson_nodes

NODE_FLOOR_REL = 1e-12

# Panels for the projection integral over the inner box [x1, x2].
COEFFICIENT_QUADRATURE = QuadratureSpec(4000)


@dataclass(frozen=True)
class PhysicsConfig:
    hbar: float = 1.0
    mass: float = 0.5
    ell0: float = 1.0
    ell1: float | None = None
    sigma0: float | None = None
    u: float = 100 * math.pi
    k: float = 0.0
    n_terms: int = 400

    def __post_init__(self):
        if self.ell1 is None:
            object.__setattr__(self, "ell1", self.ell0 / 20)
        if self.sigma0 is None:
            object.__setattr__(self, "sigma0", self.ell1 / 10)
        for name in ("hbar", "mass", "ell0", "ell1", "sigma0", "u", "k"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")
        if self.hbar <= 0 or self.mass <= 0 or self.ell0 <= 0 or self.sigma0 <= 0:
            raise InvalidArgumentError("hbar, mass, ell0 and sigma0 must be positive")
        if not 0 < self.ell1 < self.ell0:
            raise InvalidArgumentError("need 0 < ell1 < ell0")
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise InvalidArgumentError("n_terms must be a positive integer")
        object.__setattr__(self, "n_terms", int(self.n_terms))

    @property
    def x1(self) -> float:
        return (self.ell0 - self.ell1) / 2

    @property
    def x2(self) -> float:
        return (self.ell0 + self.ell1) / 2

    @property
    def xc(self) -> float:
        return self.ell0 / 2

    @property
    def t_max(self) -> float:
        """Supremum of valid times (infinite unless the box contracts)."""
        return self.ell0 / -self.u if self.u < 0 else math.inf

    def ell(self, t: float) -> float:
        self.check_time(t)
        return self.ell0 + self.u * t

    def check_time(self, t: float) -> None:
        if not math.isfinite(t) or t < 0:
            raise InvalidArgumentError(f"time must be finite and >= 0, got {t}")
        if t >= self.t_max:
            raise DomainExpiredError(
                f"t={t} is past the contracting-box limit l0/|u|={self.t_max}")

    def replace(self, **changes) -> "PhysicsConfig":
        fields = dict(hbar=self.hbar, mass=self.mass, ell0=self.ell0, ell1=self.ell1,
                      sigma0=self.sigma0, u=self.u, k=self.k, n_terms=self.n_terms)
        fields.update(changes)
        return PhysicsConfig(**fields)


class InitialState(str, enum.Enum):
    TGP = "tgp"  # truncated Gaussian packet
    TBS = "tbs"  # tiny-box ground state


class WaveSample(NamedTuple):
    psi: np.ndarray
    dpsi: np.ndarray
    d2psi: np.ndarray
    x: np.ndarray
    t: float


class PolarFields(NamedTuple):
    R: np.ndarray
    dR: np.ndarray
    d2R: np.ndarray
    dS: np.ndarray


def initial_amplitude(state: InitialState, cfg: PhysicsConfig, x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > cfg.ell0):
        raise InvalidArgumentError("initial_amplitude: x outside [0, ell0]")
    state = InitialState(state)
    d = x - cfg.xc
    inside = (x >= cfg.x1) & (x <= cfg.x2)
    kick = np.exp(1j * cfg.k * d)
    if state is InitialState.TGP:
        shape = (2 * math.pi * cfg.sigma0**2) ** -0.25 * np.exp(-d * d / (4 * cfg.sigma0**2))
    else:
        shape = math.sqrt(2 / cfg.ell1) * np.sin(math.pi * (x - cfg.x1) / cfg.ell1)
    out = np.where(inside, shape * kick, 0.0 + 0.0j)
    return complex(out) if out.ndim == 0 else out


def coefficient_quadrature(n, state: InitialState, cfg: PhysicsConfig,
                           spec: QuadratureSpec = COEFFICIENT_QUADRATURE):
    """Projection f_n = int exp(-i m u x^2 / (2 hbar l0)) sin(n pi x / l0) psi0(x) dx.

    ``n`` may be a scalar or an array of mode numbers.
    """
    n_arr = np.atleast_1d(np.asarray(n))
    if np.any(n_arr < 1):
        raise InvalidArgumentError("mode numbers start at 1")
    x, w = simpson_nodes(cfg.x1, cfg.x2, spec)
    weighted = w * np.exp(-1j * cfg.mass * cfg.u * x * x / (2 * cfg.hbar * cfg.ell0)) \
        * initial_amplitude(state, cfg, x)
    modes = np.sin(np.outer(n_arr * (math.pi / cfg.ell0), x))
    out = modes @ weighted.real + 1j * (modes @ weighted.imag)
    return complex(out[0]) if np.ndim(n) == 0 else out


def coefficient_closed_form_tgp(n, cfg: PhysicsConfig):
    """Four-Erf closed form of f_n for the truncated Gaussian packet.

    Terms are grouped pairwise into Erf differences, and each exponential
    prefactor is folded into its Erf pair, so moderate-to-large mode numbers
    do not overflow.
    """
    n_arr = np.atleast_1d(np.asarray(n, dtype=float))
    if np.any(n_arr < 1):
        raise InvalidArgumentError("mode numbers start at 1")
    hb, m, u, k = cfg.hbar, cfg.mass, cfg.u, cfg.k
    l0, l1, s0 = cfg.ell0, cfg.ell1, cfg.sigma0
    pi = math.pi
    D = hb * l0 + 2j * m * u * s0**2
    pre = 0.5j * (pi / 2) ** 0.25 * np.sqrt(s0 * l0 * hb / D)
    expo = -(1j * m * u * l0**3 + 8 * n_arr**2 * pi**2 * s0**2 * hb
             + 16 * n_arr * pi * l0 * s0**2 * hb * k
             + l0**2 * (4j * n_arr * pi * hb + 8 * s0**2 * k * (hb * k - m * u))) / (8 * l0 * D)
    log_a = 1j * n_arr * pi * l0 * hb / D
    log_b = 4 * n_arr * pi * hb * k * s0**2 / D
    den = 4 * s0 * np.sqrt(hb * l0 * D)
    drift = 2j * (2 * hb * k - m * u) * s0**2
    a1 = (-2j * (2 * n_arr * pi * hb - m * u * l1) * s0**2 + l0 * (hb * l1 - drift)) / den
    a2 = (2j * (2 * n_arr * pi * hb + m * u * l1) * s0**2 + l0 * (hb * l1 - drift)) / den
    a3 = (-2j * (2 * n_arr * pi * hb - m * u * l1) * s0**2 + l0 * (hb * l1 + drift)) / den
    a4 = (2j * (2 * n_arr * pi * hb + m * u * l1) * s0**2 + l0 * (hb * l1 + drift)) / den
    try:
        # -A[erf(a1) + erf(a4)] + B[erf(a2) + erf(a3)], with erf odd
        first = scaled_erf_difference(expo + log_a, a4, -a1)
        second = scaled_erf_difference(expo + log_b, a2, -a3)
    except NumericRangeError:
        bad = [int(v) for v in n_arr]
        raise NumericRangeError(f"closed-form TGP coefficient overflowed for n in {bad[:1]}..{bad[-1:]}")
    out = pre * (second - first)
    if not np.all(np.isfinite(out)):
        idx = int(np.flatnonzero(~np.isfinite(out))[0])
        raise NumericRangeError(f"closed-form TGP coefficient overflowed at n={int(n_arr[idx])}")
    return complex(out[0]) if np.ndim(n) == 0 else out


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Immutable expansion of a wavefunction in moving-wall modes.

    ``parseval`` is (2/l0) sum |f_n|^2, the exact norm of the truncated series
    at every time. ``initial_norm`` is the Simpson norm of the untruncated
    initial amplitude (None for hand-built spectra); their difference is the
    truncation deficit.
    """

    config: PhysicsConfig
    state_kind: InitialState | None
    coefficients: np.ndarray
    coefficient_method: str
    parseval: float = field(init=False)
    initial_norm: float | None = None

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.ndim != 1 or c.size == 0:
            raise InvalidArgumentError("coefficients must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(c)):
            raise NumericRangeError("non-finite expansion coefficient")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "parseval", float(2 / self.config.ell0 * np.sum(np.abs(c) ** 2)))
        modes = np.arange(1, c.size + 1, dtype=float)
        modes.setflags(write=False)
        object.__setattr__(self, "_modes", modes)
        object.__setattr__(self, "_abs_sum", float(np.sum(np.abs(c))))

    @classmethod
    def from_coefficients(cls, cfg: PhysicsConfig, coefficients) -> "SpectralState":
        return cls(cfg, None, coefficients, "explicit")

    @property
    def n_terms(self) -> int:
        return self.coefficients.size

    @property
    def truncation_deficit(self) -> float | None:
        if self.initial_norm is None:
            return None
        return self.initial_norm - self.parseval

    def phased_coefficients(self, t: float) -> tuple[float, np.ndarray, np.ndarray]:
        """(l(t), k_n = n pi / l, f_n exp(-i n^2 pi^2 hbar t / (2 m l0 l)))."""
        cfg = self.config
        ell = cfg.ell(t)
        n = self._modes
        phase = -(n * n) * (math.pi**2 * cfg.hbar * t / (2 * cfg.mass * cfg.ell0 * ell))
        return ell, n * (math.pi / ell), self.coefficients * np.exp(1j * phase)

    def node_floor(self, t: float) -> float:
        # sup-norm bound of the series, cheap enough for per-stage use
        ell = self.config.ell(t)
        return NODE_FLOOR_REL * 2 / math.sqrt(self.config.ell0 * ell) * self._abs_sum


def build_spectrum(state: InitialState, cfg: PhysicsConfig, method: str = "quadrature",
                   quad: QuadratureSpec = COEFFICIENT_QUADRATURE) -> SpectralState:
    state = InitialState(state)
    n = np.arange(1, cfg.n_terms + 1)
    if method == "closed-form":
        if state is not InitialState.TGP:
            raise UnsupportedMethodError("closed-form coefficients exist only for the TGP state")
        coeffs = coefficient_closed_form_tgp(n, cfg)
    elif method == "quadrature":
        coeffs = coefficient_quadrature(n, state, cfg, quad)
    else:
        raise UnsupportedMethodError(f"unknown coefficient method {method!r}")
    x, w = simpson_nodes(cfg.x1, cfg.x2, quad)
    norm0 = float(np.sum(w * np.abs(initial_amplitude(state, cfg, x)) ** 2))
    return SpectralState(cfg, state, coeffs, method, initial_norm=norm0)


def propagator(cfg: PhysicsConfig, x, t: float, x_prime, n_terms: int | None = None):
    """Truncated moving-wall kernel K(x, t; x', 0). Broadcasts over x and x_prime."""
    if t <= 0:
        raise InvalidArgumentError("propagator needs t > 0")
    ell = cfg.ell(t)
    n_terms = cfg.n_terms if n_terms is None else n_terms
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    if np.any(x < 0) or np.any(x > ell) or np.any(xp < 0) or np.any(xp > cfg.ell0):
        raise InvalidArgumentError("propagator: argument outside its box")
    hb, m, u, l0 = cfg.hbar, cfg.mass, cfg.u, cfg.ell0
    n = np.arange(1, n_terms + 1, dtype=float)
    if u == 0:
        phase = np.exp(-1j * n**2 * math.pi**2 * hb * t / (2 * m * l0**2))
    else:
        phase = np.exp(1j * n**2 * math.pi**2 * hb / (2 * m * u) * (1 / ell - 1 / l0))
    xb, xpb = np.broadcast_arrays(x, xp)
    series = np.sin(np.multiply.outer(xb, n * math.pi / ell)) \
        * np.sin(np.multiply.outer(xpb, n * math.pi / l0)) @ phase
    chirp = np.exp(1j * m * u / (2 * hb) * (xb**2 / ell - xpb**2 / l0))
    out = 2 / math.sqrt(l0 * ell) * chirp * series
    return complex(out) if out.ndim == 0 else out


def _mode_tables(x: np.ndarray, ell: float, kn: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """sin(k_n x), cos(k_n x), reflecting x > l/2 onto l - x so the right wall is exact."""
    right = x > 0.5 * ell
    y = np.where(right, ell - x, x)
    arg = np.multiply.outer(y, kn)
    s = np.sin(arg)
    c = np.cos(arg)
    if np.any(right):
        # sin(k_n (l - y)) = (-1)^(n+1) sin(k_n y), cos(k_n (l - y)) = (-1)^n cos(k_n y)
        alt = np.where(np.arange(kn.size) % 2 == 0, 1.0, -1.0)
        s[right] *= alt
        c[right] *= -alt
    return s, c


def _apply(table: np.ndarray, coeffs: np.ndarray) -> np.ndarray:
    # one real GEMM for both parts keeps the reduction order fixed
    res = table @ np.stack((coeffs.real, coeffs.imag), axis=-1)
    return res[..., 0] + 1j * res[..., 1]


def evaluate(spec: SpectralState, x, t: float) -> WaveSample:
    """psi, d psi/dx and d^2 psi/dx^2 at positions ``x`` (scalar or array) and time ``t``."""
    cfg = spec.config
    ell, kn, c = spec.phased_coefficients(t)
    if ell <= 0:
        raise DomainExpiredError(f"box width {ell} is not positive at t={t}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > ell):
        raise InvalidArgumentError(f"evaluate: x outside [0, l(t)={ell}]")
    s, co = _mode_tables(xa, ell, kn)
    g = _apply(s, c)
    g1 = _apply(co, c * kn)
    g2 = -_apply(s, c * kn * kn)
    beta = cfg.mass * cfg.u / (2 * cfg.hbar * ell)
    amp = 2 / math.sqrt(cfg.ell0 * ell) * np.exp(1j * beta * xa * xa)
    q = 2j * beta * xa
    psi = amp * g
    dpsi = amp * (q * g + g1)
    d2psi = amp * ((2j * beta + q * q) * g + 2 * q * g1 + g2)
    return WaveSample(psi, dpsi, d2psi, xa, t)


def evaluate_grid(spec: SpectralState, t: float, panels: int) -> WaveSample:
    """:func:`evaluate` on the uniform nodes x_j = j l(t) / panels, j = 0..panels.

    The mode sums become type-I sine/cosine transforms, O(M log M) instead of
    O(M N). Falls back to direct summation when the modes would alias.
    """
    cfg = spec.config
    ell, kn, c = spec.phased_coefficients(t)
    x = ell / panels * np.arange(panels + 1)
    x[-1] = ell
    if spec.n_terms >= panels:
        return evaluate(spec, x, t)
    n = spec.n_terms
    a = np.zeros(panels - 1, dtype=complex)
    a[:n] = c
    a2 = np.zeros(panels - 1, dtype=complex)
    a2[:n] = -c * kn * kn
    b = np.zeros(panels + 1, dtype=complex)
    b[1 : n + 1] = 0.5 * c * kn
    g = np.zeros(panels + 1, dtype=complex)
    g2 = np.zeros(panels + 1, dtype=complex)
    g[1:-1] = 0.5 * scipy.fft.dst(a, type=1)
    g2[1:-1] = 0.5 * scipy.fft.dst(a2, type=1)
    g1 = scipy.fft.dct(b, type=1)
    beta = cfg.mass * cfg.u / (2 * cfg.hbar * ell)
    amp = 2 / math.sqrt(cfg.ell0 * ell) * np.exp(1j * beta * x * x)
    q = 2j * beta * x
    return WaveSample(amp * g, amp * (q * g + g1),
                      amp * ((2j * beta + q * q) * g + 2 * q * g1 + g2), x, t)


def wall_samples(spec: SpectralState, t: float) -> tuple[WaveSample, WaveSample]:
    ell = spec.config.ell(t)
    return evaluate(spec, 0.0, t), evaluate(spec, ell, t)


def polar_fields(sample: WaveSample, hbar: float = 1.0, floor: float = 0.0) -> PolarFields:
    """Gradients of the polar decomposition psi = R exp(iS/hbar).

    Built from psi and its x-derivatives only, so S is never unwrapped:
    R' = Re(psi* psi')/R, S' = hbar Im(psi* psi')/R^2 and
    R'' = (|psi'|^2 + Re(psi* psi'') - R'^2)/R.
    """
    psi = np.asarray(sample.psi)
    R = np.abs(psi)
    bad = R <= floor
    if np.any(bad):
        xs = np.asarray(sample.x)
        x_bad = float(xs.reshape(-1)[int(np.flatnonzero(bad.reshape(-1))[0])]) if xs.ndim else float(xs)
        raise NodeSingularityError("wavefunction node", sample.t, x_bad)
    cross = np.conj(psi) * sample.dpsi
    dR = cross.real / R
    dS = hbar * cross.imag / (R * R)
    d2R = (np.abs(sample.dpsi) ** 2 + (np.conj(psi) * sample.d2psi).real - dR * dR) / R
    return PolarFields(R, dR, d2R, dS)
