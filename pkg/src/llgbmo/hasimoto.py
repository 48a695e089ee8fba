"""Filament function of a curve and the nonlocal dissipative Schrödinger equations it solves."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .differences import time_derivative
from .errors import DomainError, InputError
from .norms import Trajectory
from .semigroup import ComplexField, Grid, spectral_derivative


def _beta(alpha):
    return float(np.sqrt(max(0.0, 1.0 - alpha * alpha)))


def _check_t(t):
    if np.any(~(np.asarray(t) > 0)):
        raise DomainError("time must be positive")


@dataclass(frozen=True)
class FilamentData:
    curvature: np.ndarray
    torsion: np.ndarray
    grid: Grid

    def __post_init__(self):
        k = np.asarray(self.curvature, dtype=float)
        tau = np.asarray(self.torsion, dtype=float)
        if k.shape != (self.grid.n,) or tau.shape != (self.grid.n,):
            raise InputError("curvature and torsion must match the grid")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(tau))):
            raise InputError("curvature and torsion must be finite")
        if np.any(k < 0):
            raise InputError("curvature must be nonnegative")
        object.__setattr__(self, "curvature", k)
        object.__setattr__(self, "torsion", tau)

    @classmethod
    def selfsim(cls, c: float, alpha: float, t: float, grid: Grid) -> "FilamentData":
        """Curvature ``(c/sqrt t) exp(-alpha x^2/4t)`` and torsion ``beta x / 2t``."""
        _check_t(t)
        x = grid.x
        return cls(c / np.sqrt(t) * np.exp(-alpha * x * x / (4 * t)), _beta(alpha) * x / (2 * t), grid)


@dataclass(frozen=True)
class NonlocalState:
    v: ComplexField
    A_of_t: float


def integral_from_zero(values, grid: Grid) -> np.ndarray:
    """Signed cumulative trapezoid ``int_0^x`` (negative orientation for ``x < 0``)."""
    vals = np.asarray(values)
    x = grid.x
    cum = np.concatenate([np.zeros(1, vals.dtype), np.cumsum(0.5 * (vals[1:] + vals[:-1]) * grid.spacing)])
    if x[0] > 0 or x[-1] < 0:
        raise InputError("grid must contain x = 0")
    j = int(np.clip(np.searchsorted(x, 0.0, side="right") - 1, 0, x.size - 2))
    w = (0.0 - x[j]) / grid.spacing
    v0 = (1 - w) * vals[j] + w * vals[j + 1]
    at_zero = cum[j] + 0.5 * (vals[j] + v0) * (0.0 - x[j])
    return cum - at_zero


def filament_function(fd: FilamentData) -> ComplexField:
    """``kappa(x) exp(i int_0^x tau)``."""
    phase = integral_from_zero(fd.torsion, fd.grid)
    return ComplexField(fd.curvature * np.exp(1j * phase), fd.grid)


def v_selfsim(c: float, alpha: float, x, t: float):
    """``(c/sqrt t) exp((-alpha + i beta) x^2 / 4t)``."""
    _check_t(t)
    x = np.asarray(x, dtype=float)
    val = c / np.sqrt(t) * np.exp(complex(-alpha, _beta(alpha)) * x * x / (4 * t))
    return complex(val) if np.ndim(val) == 0 else val


def v_selfsim_fourier(c: float, alpha: float, xi, t: float):
    """Transform ``int v(x) exp(-i x xi) dx = 2c sqrt(pi (alpha + i beta)) exp(-(alpha + i beta) xi^2 t)``."""
    d = complex(alpha, _beta(alpha))
    return 2 * c * np.sqrt(np.pi * d) * np.exp(-d * np.asarray(xi) ** 2 * t)


def forcing_A(c: float, alpha: float, t: float) -> float:
    _check_t(t)
    return _beta(alpha) * c * c / t


def w_explicit(c: complex, alpha: float, x, t: float):
    """``(c/sqrt t) exp(i beta |c|^2 ln(t)/2 + (i beta - alpha) x^2 / 4t)``."""
    if c == 0:
        raise DomainError("w_explicit needs c != 0")
    _check_t(t)
    beta = _beta(alpha)
    x = np.asarray(x, dtype=float)
    val = c / np.sqrt(t) * np.exp(1j * beta * abs(c) ** 2 * np.log(t) / 2
                                  + complex(-alpha, beta) * x * x / (4 * t))
    return complex(val) if np.ndim(val) == 0 else val


def spectral_integral_from_zero(values, grid: Grid) -> np.ndarray:
    """``int_0^x`` of a smooth integrand that is periodic on the window up to its mean.

    The mean is integrated exactly as a linear function; the remainder by
    dividing its Fourier coefficients by ``i xi``.
    """
    f = np.asarray(values, dtype=float)
    n = f.size
    mean = f.mean()
    spec = np.fft.fft(f - mean)
    xi = 2 * np.pi * np.fft.fftfreq(n, d=grid.spacing)
    xi[0] = 1.0
    spec /= 1j * xi
    spec[0] = 0.0
    if n % 2 == 0:
        spec[n // 2] = 0.0
    prim = np.fft.ifft(spec).real + mean * grid.x
    x = grid.x
    if x[0] > 0 or x[-1] < 0:
        raise InputError("grid must contain x = 0")
    # value of the primitive at 0 from its trigonometric interpolant
    k = 2 * np.pi * np.fft.fftfreq(n, d=grid.spacing)
    at_zero = float(np.real(np.sum(spec * np.exp(1j * k * (0.0 - x[0]))) / n))
    return prim - at_zero


def nonlocal_term(v, grid: Grid, method: str = "spectral") -> np.ndarray:
    """``int_0^x Im(conj(v) v_x)`` with a spectral ``v_x`` (fields must decay at the window ends).

    ``method="trapezoid"`` uses the signed cumulative trapezoid instead of
    the spectral primitive.
    """
    dv = spectral_derivative(np.asarray(v, dtype=complex), grid.spacing)
    dens = np.imag(np.conj(v) * dv)
    if method == "spectral":
        return spectral_integral_from_zero(dens, grid)
    if method == "trapezoid":
        return integral_from_zero(dens, grid)
    raise InputError(f"unknown quadrature {method!r}")


def nonlocal_term_selfsim(c: float, alpha: float, x, t: float):
    """Closed form ``(c^2 beta / 2 alpha t)(1 - exp(-alpha x^2 / 2t))`` of :func:`nonlocal_term` on ``v_selfsim``."""
    x = np.asarray(x, dtype=float)
    return c * c * _beta(alpha) / (2 * alpha * t) * (1 - np.exp(-alpha * x * x / (2 * t)))


def _nonlocal_residual(tr: Trajectory, alpha: float, forcing):
    if len(tr) < 3:
        raise InputError("residual needs at least 3 time samples")
    beta = _beta(alpha)
    idx, vt = time_derivative(tr.values, tr.times)
    worst = 0.0
    for row, k in enumerate(idx):
        v = tr.values[k]
        vxx = spectral_derivative(v, tr.grid.spacing, order=2)
        bracket = beta * np.abs(v) ** 2 + 2 * alpha * nonlocal_term(v, tr.grid) - forcing(tr.times[k])
        res = 1j * vt[row] + complex(beta, -alpha) * vxx + 0.5 * v * bracket
        worst = max(worst, float(np.max(np.abs(res[2:-2]))))
    return worst


def residual_nonlocal(tr: Trajectory, c: float, alpha: float, forcing=None) -> float:
    """Max residual of the forced nonlocal equation on interior samples.

    ``forcing`` defaults to ``forcing_A(c, alpha, t)``; pass a callable of
    ``t`` to test other forcings.
    """
    if forcing is None:
        def forcing(t):
            return forcing_A(c, alpha, t)
    return _nonlocal_residual(tr, alpha, forcing)


def residual_bis(tr: Trajectory, alpha: float) -> float:
    """Max residual of the unforced nonlocal equation on interior samples."""
    return _nonlocal_residual(tr, alpha, lambda t: 0.0)


def sample_trajectory(func, grid: Grid, times) -> Trajectory:
    """Stack ``func(x, t)`` over ``times`` into a complex trajectory."""
    times = np.asarray(times, dtype=float)
    return Trajectory(times, np.stack([func(grid.x, t) for t in times]), grid)


@dataclass(frozen=True)
class PairingValue:
    t: float
    value: complex

    @property
    def modulus(self) -> float:
        return abs(self.value)

    @property
    def phase(self) -> float:
        return float(np.angle(self.value))


def weak_limit_pairing(c: complex, alpha: float, phi, t_sequence, support=None,
                       width: float = 20.0) -> list:
    """``int w(x, t) phi(x) dx`` for each ``t`` in ``t_sequence``.

    The integration interval is ``[-L, L]`` with
    ``L = width sqrt(t) max(1, 1/sqrt(alpha))`` (outside it ``|w|`` is below
    ``exp(-width^2 / 4)`` of its peak), intersected with ``support`` when given.
    """
    out = []
    for t in t_sequence:
        L = width * np.sqrt(t) * max(1.0, 1.0 / np.sqrt(alpha))
        lo, hi = -L, L
        if support is not None:
            lo, hi = max(lo, support[0]), min(hi, support[1])
        if lo >= hi:
            out.append(PairingValue(float(t), 0j))
            continue
        val, _ = integrate.quad(lambda x: w_explicit(c, alpha, x, t) * phi(x), lo, hi,
                                complex_func=True, limit=1000, epsabs=1e-13, epsrel=1e-11)
        out.append(PairingValue(float(t), complex(val)))
    return out


def phase_increments(values) -> np.ndarray:
    """Successive phase changes of a pairing sequence, wrapped to ``(-pi, pi]``."""
    z = np.array([p.value if isinstance(p, PairingValue) else p for p in values])
    d = np.angle(z[1:] / z[:-1])
    return d
