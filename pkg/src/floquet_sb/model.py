"""Domain types: drive, spectral density, discrete bath, temperature.

Also hosts the six thermal spectral integrals that enter the closed-form
decoherence exponent and dynamical phase. Two evaluation routes exist: an
adaptive quadrature for a single time (the contract path) and a composite
Gauss-Legendre grid evaluator used by the figure pipelines, which is tested
against both the adaptive route and dense discrete-bath sums.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import ToleranceError
from scipy import integrate

__all__ = [
    "DriveConfig",
    "OhmicSpectralDensity",
    "CallableSpectralDensity",
    "DiscreteBath",
    "ThermalParams",
    "SpectralIntegrals",
    "ohmic_j",
    "coth_half",
    "discretize",
    "spectral_integrals",
    "spectral_integrals_grid",
]

COTH_SWITCH = 1e-4  # below this value of beta*omega the Laurent expansion is used


@dataclass(frozen=True)
class DriveConfig:
    """Driven two-level system parameters (hbar = 1, frequencies in omega0 units).

    The expansion parameter of the high-frequency treatment is 1/omegaL; the
    dimensionless drive ratio 2A/omegaL controls the Bessel harmonics.
    """

    omega0: float
    A: float
    omegaL: float

    def __post_init__(self):
        if self.omega0 <= 0 or self.omegaL <= 0 or self.A < 0:
            raise ValueError("require omega0 > 0, omegaL > 0, A >= 0")
        if self.omegaL <= 2.0 * self.omega0:
            warnings.warn(
                "omegaL <= 2*omega0: the first-order high-frequency expansion "
                "is unreliable this slow",
                stacklevel=2,
            )

    @classmethod
    def from_ratio(cls, omega0: float, ratio: float, omegaL: float) -> "DriveConfig":
        """Build from the dimensionless ratio 2A/omegaL instead of A."""
        return cls(omega0=omega0, A=0.5 * ratio * omegaL, omegaL=omegaL)

    @property
    def period(self) -> float:
        return 2.0 * math.pi / self.omegaL

    @property
    def ratio(self) -> float:
        """Dimensionless drive strength 2A/omegaL."""
        return 2.0 * self.A / self.omegaL


@dataclass(frozen=True)
class OhmicSpectralDensity:
    """Ohmic bath spectral density J(w) = lam * w * exp(-w/omega_c)."""

    lam: float
    omega_c: float

    def __post_init__(self):
        if self.lam < 0 or self.omega_c <= 0:
            raise ValueError("require lam >= 0 and omega_c > 0")

    def j(self, omega):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega < 0):
            raise ValueError("spectral density defined for omega >= 0")
        out = self.lam * omega * np.exp(-omega / self.omega_c)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CallableSpectralDensity:
    """Wrap an arbitrary J(w) callable (e.g. a tabulated interpolant)."""

    func: Callable[[np.ndarray], np.ndarray]
    omega_c: float  # characteristic decay scale, sets the default cutoff

    def j(self, omega):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega < 0):
            raise ValueError("spectral density defined for omega >= 0")
        out = np.asarray(self.func(omega), dtype=float)
        return float(out) if out.ndim == 0 else out


SpectralDensity = Union[OhmicSpectralDensity, CallableSpectralDensity]


def ohmic_j(omega: float, sd: OhmicSpectralDensity) -> float:
    """J(w) for an Ohmic bath; domain error for negative frequency."""
    return sd.j(omega)


class DiscreteBath:
    """Explicit bosonic mode list {(omega_k, g_k)} with omega_k > 0 distinct."""

    def __init__(self, omega: Sequence[float], g: Sequence[float]):
        omega = np.asarray(omega, dtype=float)
        g = np.asarray(g, dtype=float)
        if omega.ndim != 1 or omega.shape != g.shape or omega.size < 1:
            raise ValueError("omega and g must be equal-length 1d arrays, N >= 1")
        if np.any(omega <= 0):
            raise ValueError("all mode frequencies must be strictly positive")
        if np.unique(omega).size != omega.size:
            raise ValueError("mode frequencies must be distinct")
        self.omega = omega
        self.g = g

    @property
    def n_modes(self) -> int:
        return self.omega.size

    @property
    def modes(self) -> list[tuple[float, float]]:
        return list(zip(self.omega.tolist(), self.g.tolist()))

    def __repr__(self) -> str:
        return f"DiscreteBath(N={self.n_modes})"


@dataclass(frozen=True)
class ThermalParams:
    """Inverse bath temperature; zero_temperature replaces coth by 1."""

    beta: float = math.inf
    zero_temperature: bool = False

    def __post_init__(self):
        if self.zero_temperature:
            return
        if not (self.beta > 0) or math.isinf(self.beta):
            raise ValueError(
                "beta must be finite and positive (use zero_temperature=True "
                "for the T=0 limit)"
            )

    def coth(self, omega):
        """coth(beta*omega/2), elementwise; 1 at zero temperature."""
        omega = np.asarray(omega, dtype=float)
        if self.zero_temperature:
            out = np.ones_like(omega)
            return float(out) if out.ndim == 0 else out
        return coth_half(self.beta * omega)


def coth_half(x):
    """coth(x/2) with the small-argument expansion 2/x + x/6 below x = 1e-4.

    The argument is clipped away from zero, so x = 0 yields a huge-but-finite
    value; integrands multiplying by a density vanishing at w = 0 recover the
    correct limit.
    """
    x = np.asarray(x, dtype=float)
    x = np.where(np.abs(x) < 1e-300, 1e-300, x)
    small = np.abs(x) < COTH_SWITCH
    inv = np.where(small, x, 1.0)
    safe = np.where(small, 1.0, x)
    out = np.where(small, 2.0 / inv + x / 6.0, 1.0 / np.tanh(0.5 * safe))
    return float(out) if out.ndim == 0 else out


def discretize(sd: SpectralDensity, n_modes: int, omega_max: float) -> DiscreteBath:
    """Sample a continuum J(w) into n_modes midpoint modes on [0, omega_max].

    Modes sit at w_k = (k - 1/2) * omega_max / N with g_k^2 = J(w_k) * dw, so
    discrete sums sum_k g_k^2 f(w_k) converge to int J f dw at the midpoint
    rule's O(dw^2).
    """
    if n_modes < 1 or omega_max <= 0:
        raise ValueError("require n_modes >= 1 and omega_max > 0")
    dw = omega_max / n_modes
    omega = (np.arange(n_modes) + 0.5) * dw
    g = np.sqrt(np.asarray(sd.j(omega)) * dw)
    return DiscreteBath(omega, g)


@dataclass(frozen=True)
class SpectralIntegrals:
    """The six bath integrals entering the closed-form phases, at one time t.

    i1 = int J (1-cos wt)/w^2 coth    i2 = int J coth
    i3 = int J cos(wt) coth           i4 = int J sin(wt)/w coth
    i5 = int J (1-cos wt)/w           i6 = int J sin(wt)
    (coth means coth(beta w / 2); fields may hold arrays on the grid route.)
    """

    i1: Union[float, np.ndarray]
    i2: Union[float, np.ndarray]
    i3: Union[float, np.ndarray]
    i4: Union[float, np.ndarray]
    i5: Union[float, np.ndarray]
    i6: Union[float, np.ndarray]
    t: Union[float, np.ndarray]
    tail_bound: float = 0.0


def _quad(func, a, b, tol, **kw):
    with warnings.catch_warnings():
        # roundoff chatter is handled by the explicit estimate check below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(
            func, a, b, epsabs=tol, epsrel=1e-11, limit=400, **kw
        )
    if err > 10 * max(tol, 1e-14):
        raise ToleranceError(
            f"spectral integral did not converge: achieved {err:.3g} > tol {tol:g}"
        )
    return val


def _tail_bound(sd: SpectralDensity, omega_max: float, th: ThermalParams) -> float:
    # Crude but safe for exponentially cut-off densities: J decays at least
    # like exp(-w/omega_c) past the cutoff region; coth is ~1 out there.
    w = np.linspace(omega_max, omega_max + 10 * sd.omega_c, 64)
    jmax = float(np.max(sd.j(w)))
    return jmax * 10 * sd.omega_c * max(2.0 / omega_max**2, 1.0 / omega_max, 1.0)


def spectral_integrals(
    sd: SpectralDensity,
    t: float,
    th: ThermalParams,
    tol: float = 1e-9,
    omega_max: float | None = None,
) -> SpectralIntegrals:
    """All six spectral integrals at time t via adaptive quadrature.

    Oscillatory pieces use the QUADPACK sin/cos weighted rules so accuracy is
    t-uniform; the 1/w-singular combinations are split at a small frequency
    below which the full (finite) integrand is integrated directly.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    wmax = 40.0 * sd.omega_c if omega_max is None else omega_max
    coth = th.coth
    jfun = sd.j

    if t == 0.0:
        i2 = _quad(lambda w: jfun(w) * coth(w), 0.0, wmax, tol)
        return SpectralIntegrals(0.0, i2, i2, 0.0, 0.0, 0.0, 0.0,
                                 _tail_bound(sd, wmax, th))

    # split point: direct quadrature below, weighted rules above
    a = min(1.0, 20.0 / t, wmax)

    def jc(w):
        w = max(w, 1e-300)  # w = 0 endpoint: finite limit via the clipped ratio
        return jfun(w) * coth(w)

    def j_over_w(w):
        w = max(w, 1e-300)
        return jfun(w) / w

    def one_minus_cos_over_w2(w):
        w = max(w, 1e-300)
        return 2.0 * np.sin(0.5 * w * t) ** 2 / w**2

    i2 = _quad(jc, 0.0, wmax, tol)

    i1 = _quad(lambda w: jc(w) * one_minus_cos_over_w2(w), 0.0, a, tol)
    if a < wmax:
        i1 += _quad(lambda w: jc(w) / w**2, a, wmax, tol)
        i1 -= _quad(lambda w: jc(w) / w**2, a, wmax, tol, weight="cos", wvar=t)

    i3 = _quad(jc, 0.0, wmax, tol, weight="cos", wvar=t)

    i4 = _quad(lambda w: jc(w) * np.sin(w * t) / max(w, 1e-300), 0.0, a, tol)
    if a < wmax:
        i4 += _quad(lambda w: jc(w) / w, a, wmax, tol, weight="sin", wvar=t)

    i5 = _quad(j_over_w, 0.0, wmax, tol)
    i5 -= _quad(j_over_w, 0.0, wmax, tol, weight="cos", wvar=t)

    i6 = _quad(jfun, 0.0, wmax, tol, weight="sin", wvar=t)

    return SpectralIntegrals(i1, i2, i3, i4, i5, i6, t, _tail_bound(sd, wmax, th))


def spectral_integrals_grid(
    sd: SpectralDensity,
    ts: np.ndarray,
    th: ThermalParams,
    omega_max: float | None = None,
) -> SpectralIntegrals:
    """Vectorized spectral integrals on a time grid (composite Gauss panels).

    Panel density tracks the largest oscillation phase omega_max * t_max so
    every panel sees at most ~pi radians of phase; with 16-point Gauss per
    panel the result matches the adaptive route to ~1e-12.
    """
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0):
        raise ValueError("times must be >= 0")
    wmax = 40.0 * sd.omega_c if omega_max is None else omega_max
    t_max = float(np.max(ts)) if ts.size else 0.0
    n_panels = max(96, int(math.ceil(wmax * t_max / math.pi)) + 8,
                   int(math.ceil(8 * wmax / sd.omega_c)))
    edges = np.linspace(0.0, wmax, n_panels + 1)
    nodes16, weights16 = np.polynomial.legendre.leggauss(16)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    w = (mid[:, None] + half[:, None] * nodes16[None, :]).ravel()
    wt = (half[:, None] * weights16[None, :]).ravel()

    jv = np.asarray(sd.j(w))
    cothv = np.asarray(th.coth(w))
    jc = jv * cothv

    out1 = np.empty_like(ts)
    out2 = np.empty_like(ts)
    out3 = np.empty_like(ts)
    out4 = np.empty_like(ts)
    out5 = np.empty_like(ts)
    out6 = np.empty_like(ts)
    i2_val = float(np.dot(wt, jc))
    for lo in range(0, ts.size, 256):
        tb = ts[lo : lo + 256]
        phase = np.outer(tb, w)
        s = np.sin(phase)
        one_m_cos = 2.0 * np.sin(0.5 * phase) ** 2
        out1[lo : lo + 256] = one_m_cos @ (wt * jc / w**2)
        out3[lo : lo + 256] = (1.0 - one_m_cos) @ (wt * jc)
        out4[lo : lo + 256] = s @ (wt * jc / w)
        out5[lo : lo + 256] = one_m_cos @ (wt * jv / w)
        out6[lo : lo + 256] = s @ (wt * jv)
    out2[:] = i2_val
    return SpectralIntegrals(out1, out2, out3, out4, out5, out6, ts,
                             _tail_bound(sd, wmax, th))
