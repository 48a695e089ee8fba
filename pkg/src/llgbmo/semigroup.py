"""Dissipative Schrödinger (complex Ginzburg--Landau) semigroup.

``S(t) = exp((alpha + i beta) t Laplacian)`` is realised three ways:

* pointwise, through the complex Gaussian kernel (:func:`kernel_value`);
* on grid fields, as a Fourier multiplier (:func:`apply`);
* exactly on two-valued step data, through the complex error function
  (:func:`apply_to_step`).

Grid fields live on a uniform 1-D grid ``x_j = origin + j * spacing``.  The
spectral path supports two boundary treatments: ``"periodic"`` (the field is
one period of a periodic function) and ``"even"`` (the field is mirrored
about both ends before transforming, which suits data that tends to
different constants at the two ends of the window).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .errors import DomainError, InputError, UnsupportedError

ALIAS_TOL = 1e-12


@dataclass(frozen=True)
class GLParams:
    """Damping ``alpha`` in (0, 1]; ``beta = sqrt(1 - alpha**2)``."""

    alpha: float
    dim: int = 1
    beta: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise DomainError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise DomainError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "beta", float(np.sqrt(max(0.0, 1.0 - self.alpha**2))))

    @property
    def diffusion(self) -> complex:
        """The complex diffusion coefficient ``alpha + i beta``."""
        return complex(self.alpha, self.beta)


@dataclass(frozen=True)
class Grid:
    origin: float
    spacing: float
    n: int

    def __post_init__(self):
        if not self.spacing > 0:
            raise InputError("grid spacing must be positive")
        if self.n < 2:
            raise InputError("a grid needs at least two samples")

    @classmethod
    def symmetric(cls, half_width: float, n: int) -> "Grid":
        """``n`` nodes on ``[-half_width, half_width)``; x = 0 is a node for even ``n``."""
        return cls(-float(half_width), 2.0 * half_width / n, int(n))

    @property
    def x(self) -> np.ndarray:
        return self.origin + self.spacing * np.arange(self.n)

    @property
    def extent(self) -> float:
        """Half-width of the sampled window."""
        return 0.5 * self.n * self.spacing

    def refined(self, factor: int = 2) -> "Grid":
        return Grid(self.origin, self.spacing / factor, self.n * factor)


@dataclass(frozen=True)
class ComplexField:
    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 1 or v.shape[0] != self.grid.n:
            raise InputError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("ComplexField samples must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, func, grid: Grid) -> "ComplexField":
        return cls(func(grid.x), grid)

    @property
    def origin(self) -> float:
        return self.grid.origin

    @property
    def spacing(self) -> float:
        return self.grid.spacing

    @property
    def extent(self) -> float:
        return self.grid.extent

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))


# --------------------------------------------------------------------------
# kernel


def kernel_value(x, t: float, p: GLParams) -> complex:
    """Complex Gaussian kernel ``G(x, t)`` of ``S(t)``.

    ``x`` is a scalar for ``dim == 1``, otherwise a length-``dim`` vector.
    Arrays of 1-D points are accepted and evaluated elementwise.
    """
    if not t > 0:
        raise DomainError(f"kernel needs t > 0, got {t!r}")
    x = np.asarray(x, dtype=float)
    if p.dim == 1:
        r2 = x**2
    else:
        if x.shape[-1] != p.dim:
            raise InputError(f"point must have {p.dim} coordinates")
        r2 = np.sum(x**2, axis=-1)
    d = p.diffusion
    # principal branch: Re d > 0 keeps 4 pi d t in the right half-plane
    val = np.exp(-r2 / (4.0 * d * t)) / (4.0 * np.pi * d * t) ** (p.dim / 2.0)
    return complex(val) if np.ndim(val) == 0 else val


def kernel_modulus(x, t: float, p: GLParams):
    """``|G(x, t)| = exp(-alpha |x|^2 / 4t) / (4 pi t)^(N/2)``."""
    if not t > 0:
        raise DomainError(f"kernel needs t > 0, got {t!r}")
    x = np.asarray(x, dtype=float)
    r2 = x**2 if p.dim == 1 else np.sum(x**2, axis=-1)
    return np.exp(-p.alpha * r2 / (4.0 * t)) / (4.0 * np.pi * t) ** (p.dim / 2.0)


# --------------------------------------------------------------------------
# spectral machinery


def _extend(values: np.ndarray, boundary: str) -> np.ndarray:
    if boundary == "periodic":
        return values
    if boundary == "even":
        return np.concatenate([values, values[::-1]], axis=0)
    raise InputError(f"unknown boundary treatment {boundary!r}")


def wavenumbers(n: int, spacing: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(n, d=spacing)


def _check_alias(spectrum: np.ndarray, name: str = "field"):
    n = spectrum.shape[0]
    if n % 2:
        return
    mags = np.abs(spectrum)
    peak = mags.max()
    if peak == 0:
        return
    if mags[n // 2].max() > ALIAS_TOL * peak:
        warnings.warn(
            f"{name} has energy {mags[n // 2].max() / peak:.2e} (relative) at the Nyquist "
            "mode; periodisation/aliasing error may be visible",
            RuntimeWarning,
            stacklevel=3,
        )


def multiplier(values: np.ndarray, spacing: float, symbol, boundary: str = "periodic",
               check_alias: bool = False) -> np.ndarray:
    """Apply the Fourier multiplier ``symbol(xi)`` along axis 0 of ``values``."""
    n = values.shape[0]
    ext = _extend(values, boundary)
    spec = np.fft.fft(ext, axis=0)
    if check_alias:
        _check_alias(spec)
    xi = wavenumbers(ext.shape[0], spacing)
    sym = symbol(xi)
    if spec.ndim > 1:
        sym = sym.reshape((-1,) + (1,) * (spec.ndim - 1))
    out = np.fft.ifft(spec * sym, axis=0)
    return out[:n]


def spectral_derivative(values: np.ndarray, spacing: float, order: int = 1,
                        boundary: str = "periodic") -> np.ndarray:
    """Spectral ``d^order/dx^order`` along axis 0 (Nyquist mode zeroed for odd orders)."""
    n_ext = values.shape[0] * (2 if boundary == "even" else 1)

    def symbol(xi):
        s = (1j * xi) ** order
        if order % 2 and n_ext % 2 == 0:
            s[n_ext // 2] = 0.0
        return s

    out = multiplier(np.asarray(values, dtype=complex), spacing, symbol, boundary)
    if np.isrealobj(values):
        return out.real
    return out


def semigroup_symbol(t: float, p: GLParams):
    d = p.diffusion

    def symbol(xi):
        return np.exp(-d * xi**2 * t)

    return symbol


def apply_array(values: np.ndarray, spacing: float, t: float, p: GLParams,
                boundary: str = "periodic") -> np.ndarray:
    """Array-level ``S(t)``; used by the solvers to avoid wrapping every step."""
    if t == 0:
        return np.array(values, dtype=complex)
    return multiplier(values, spacing, semigroup_symbol(t, p), boundary)


def apply(u: ComplexField, t: float, p: GLParams, boundary: str = "periodic",
          check_alias: bool = True) -> ComplexField:
    """``S(t) u`` by the Fourier multiplier ``exp(-(alpha + i beta) |xi|^2 t)``.

    With ``boundary="periodic"`` the samples are taken as one period; with
    ``"even"`` they are mirrored first (homogeneous Neumann ends).  A
    ``RuntimeWarning`` is emitted when the (extended) spectrum is not below
    ``1e-12`` of its peak at the Nyquist mode.
    """
    if t < 0:
        raise DomainError(f"semigroup time must be >= 0, got {t!r}")
    if p.dim != 1:
        raise UnsupportedError("grid fields are one-dimensional")
    if t == 0:
        return u
    out = multiplier(u.values, u.spacing, semigroup_symbol(t, p), boundary, check_alias)
    return ComplexField(out, u.grid)


def apply_to_step(a_plus: complex, a_minus: complex, x, t: float, p: GLParams):
    """Exact ``S(t)`` applied to ``a_plus * 1{x>0} + a_minus * 1{x<0}``.

    The sign function evolves into ``erf(x / sqrt(4 (alpha + i beta) t))``
    (principal square root), so the result is the average of the two states
    plus half the jump times that complex error function.
    """
    if p.dim != 1:
        raise UnsupportedError("step data are defined in one dimension only")
    if not t > 0:
        raise DomainError(f"step evolution needs t > 0, got {t!r}")
    x = np.asarray(x, dtype=float)
    z = x / np.sqrt(4.0 * p.diffusion * t)
    val = 0.5 * (a_plus + a_minus) + 0.5 * (a_plus - a_minus) * special.erf(z)
    return complex(val) if np.ndim(val) == 0 else val


def step_gradient(a_plus: complex, a_minus: complex, x, t: float, p: GLParams):
    """``d/dx`` of :func:`apply_to_step`: the jump times the kernel."""
    return (a_plus - a_minus) * kernel_value(x, t, p)
