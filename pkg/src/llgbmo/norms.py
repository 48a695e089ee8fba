"""Discrete BMO, X and Y norm estimators, plus the exponential integral.

All ball suprema are taken over finitely many balls, so every estimator here
is a lower bound of the corresponding continuum quantity.

Conventions
-----------
* A field sample ``f_j`` represents the cell ``[x_j - h/2, x_j + h/2]``, so a
  window of ``w`` consecutive samples is a ball of radius ``w h / 2``.
* For a requested radius ``r`` both ``floor(2r/h)`` and ``ceil(2r/h)``
  windows are scanned.  Even windows centred on a cell face are what capture
  a jump sitting between two nodes exactly.
* Space-time balls ``Q_r(x) = [x - r, x + r] x [0, r^2]`` only see the
  trajectory's sample times; the slab ``[0, times[0]]`` is not covered.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, InputError
from .semigroup import ComplexField, Grid
from .stereo import SpinField

EULER_GAMMA = 0.57721566490153286061


# --------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class Trajectory:
    """Time samples of a scalar (complex) or vector (spin) field on one grid.

    ``values`` has shape ``(nt, n)`` for complex fields and ``(nt, n, 3)``
    for spin fields; ``gradients`` (optional) has the same shape and holds
    ``d/dx`` of the samples.
    """

    times: np.ndarray
    values: np.ndarray
    grid: Grid
    gradients: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise InputError("times must be a non-empty 1-D array")
        if np.any(t <= 0):
            raise InputError("trajectory times must be positive")
        if np.any(np.diff(t) <= 0):
            raise InputError("trajectory times must be strictly increasing")
        v = np.asarray(self.values)
        if v.shape[:2] != (t.size, self.grid.n):
            raise InputError(f"values shape {v.shape} does not match ({t.size}, {self.grid.n}, ...)")
        if self.gradients is not None:
            g = np.asarray(self.gradients)
            if g.shape != v.shape:
                raise InputError("gradients must have the same shape as values")
            object.__setattr__(self, "gradients", g)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def is_spin(self) -> bool:
        return self.values.ndim == 3

    def __len__(self):
        return self.times.size

    def field(self, k: int):
        if self.is_spin:
            return SpinField(self.values[k], self.grid)
        return ComplexField(self.values[k], self.grid)

    @classmethod
    def from_fields(cls, times, fields, gradients=None) -> "Trajectory":
        fields = list(fields)
        if not fields:
            raise InputError("no fields given")
        grid = fields[0].grid
        if any(f.grid != grid for f in fields):
            raise InputError("all fields must share one grid")
        return cls(np.asarray(times, float), np.stack([f.values for f in fields]), grid, gradients)

    def with_gradients(self, gradients) -> "Trajectory":
        return Trajectory(self.times, self.values, self.grid, gradients)

    def gradient_magnitude(self) -> np.ndarray:
        if self.gradients is None:
            raise InputError("trajectory carries no gradient data")
        g = self.gradients
        return np.linalg.norm(g, axis=2) if g.ndim == 3 else np.abs(g)

    def value_magnitude(self) -> np.ndarray:
        v = self.values
        return np.linalg.norm(v, axis=2) if v.ndim == 3 else np.abs(v)


@dataclass(frozen=True)
class ParabolicBallSet:
    centers: np.ndarray
    radii: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.centers, dtype=float))
        r = np.atleast_1d(np.asarray(self.radii, dtype=float))
        if r.size == 0 or c.size == 0:
            raise InputError("ball set must contain at least one center and one radius")
        if np.any(r <= 0):
            raise InputError("ball radii must be positive")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)

    @classmethod
    def dyadic(cls, grid: Grid, min_radius: float | None = None, stride: int = 1) -> "ParabolicBallSet":
        """Radii ``extent * 2**-k`` down to ``min_radius`` (default ``2h``); centers on the grid."""
        lo = 2 * grid.spacing if min_radius is None else min_radius
        radii = []
        r = grid.extent
        while r >= lo:
            radii.append(r)
            r *= 0.5
        if not radii:
            radii = [grid.extent]
        return cls(grid.x[::stride], np.array(radii))

    def scaled(self, factor: float) -> "ParabolicBallSet":
        return ParabolicBallSet(self.centers * factor, self.radii * factor)


# --------------------------------------------------------------------------
# BMO


def _samples(f, spacing):
    if isinstance(f, SpinField):
        return np.asarray(f.values, float), f.spacing
    if isinstance(f, ComplexField):
        return f.values[:, None], f.spacing
    arr = np.asarray(f)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError("field samples must be 1-D or (n, k)")
    return arr, (1.0 if spacing is None else float(spacing))


def _window_lengths(windows, spacing, n):
    radii = np.atleast_1d(np.asarray(windows, dtype=float))
    if radii.size == 0:
        raise InputError("window list is empty")
    if np.any(radii <= 0):
        raise InputError("window radii must be positive")
    lengths = set()
    for r in radii:
        q = 2.0 * r / spacing
        for w in (int(np.floor(q + 1e-9)), int(np.ceil(q - 1e-9))):
            lengths.add(min(max(w, 1), n))
    return sorted(lengths)


def _norm_rows(diff):
    if np.iscomplexobj(diff) or diff.shape[-1] == 1:
        return np.sqrt(np.sum(np.abs(diff) ** 2, axis=-1))
    return np.linalg.norm(diff, axis=-1)


def bmo_seminorm(f, windows, spacing=None, stride: int = 1) -> float:
    """Largest mean oscillation ``|B|^-1 sum |f - f_B| h`` over sliding windows.

    Parameters
    ----------
    f : SpinField, ComplexField or array
        Samples; arrays of shape ``(n,)`` or ``(n, k)`` need ``spacing``.
    windows : sequence of float
        Ball radii.  Each radius is realised by the two nearest window lengths.
    stride : int
        Step between window start indices (1 scans every window).
    """
    arr, h = _samples(f, spacing)
    n = arr.shape[0]
    best = 0.0
    for w in _window_lengths(windows, h, n):
        if w < 2:
            continue
        starts = np.arange(0, n - w + 1, stride)
        view = np.lib.stride_tricks.sliding_window_view(arr, w, axis=0)  # (n-w+1, k, w)
        chunk = max(1, 2_000_000 // (w * arr.shape[1]))
        for i in range(0, starts.size, chunk):
            win = np.moveaxis(view[starts[i:i + chunk]], 2, 1)  # (m, w, k)
            # means from the window itself, so equal windows give bit-equal results
            dev = _norm_rows(win - win.mean(axis=1, keepdims=True))
            best = max(best, float(np.max(dev.mean(axis=1))))
    return best


def bmo_double_average(f, windows, spacing=None, stride: int = 1) -> float:
    """Largest ``|B|^-2 sum sum |f(y) - f(z)|`` over the same windows as :func:`bmo_seminorm`.

    On every window the triangle inequality gives
    ``oscillation <= double average <= 2 * oscillation``, so the two
    estimators are sandwiched exactly, window by window.
    """
    arr, h = _samples(f, spacing)
    n = arr.shape[0]
    lengths = [w for w in _window_lengths(windows, h, n) if w >= 2]
    if not lengths:
        return 0.0
    # row-wise prefix sums of the pair-distance matrix
    prefix = np.zeros((n, n + 1))
    rows = max(1, 4_000_000 // (n * arr.shape[1]))
    for a in range(0, n, rows):
        block = _norm_rows(arr[a:a + rows, None, :] - arr[None, :, :])
        prefix[a:a + rows, 1:] = np.cumsum(block, axis=1)
    best = 0.0
    for w in lengths:
        starts = np.arange(0, n - w + 1, stride)
        total = np.zeros(starts.size)
        for k in range(w):
            total += prefix[starts + k, starts + w] - prefix[starts + k, starts]
        best = max(best, float(np.max(total)) / w**2)
    return best


# --------------------------------------------------------------------------
# space-time norms


def _ball_sup(times, density, grid: Grid, balls: ParabolicBallSet) -> float:
    """``sup_{x, r} r^-1 int_0^{r^2} int_{x-r}^{x+r} density dx dt`` over the sampled balls."""
    h = grid.spacing
    x = grid.x
    n = grid.n
    csum = np.concatenate([np.zeros((density.shape[0], 1)), np.cumsum(density, axis=1)], axis=1)
    best = 0.0
    lo, hi = x[0], x[-1]
    for r in balls.radii:
        r2 = r * r
        if r2 <= times[0]:
            continue
        m = int(round(r / h))
        if m < 1:
            continue
        centers = balls.centers[(balls.centers - r >= lo - 1e-12) & (balls.centers + r <= hi + 1e-12)]
        if centers.size == 0:
            continue
        j = np.clip(np.rint((centers - x[0]) / h).astype(int), m, n - 1 - m)
        # trapezoid over samples j-m..j+m
        space = h * (csum[:, j + m + 1] - csum[:, j - m]
                     - 0.5 * (density[:, j - m] + density[:, j + m]))
        k_in = np.searchsorted(times, r2, side="right")
        ts = times[:k_in]
        vals = space[:k_in]
        if k_in < times.size and ts[-1] < r2:
            w = (r2 - ts[-1]) / (times[k_in] - ts[-1])
            tail = (1 - w) * vals[-1] + w * space[k_in]
            ts = np.append(ts, r2)
            vals = np.vstack([vals, tail])
        if ts.size < 2:
            continue
        integral = integrate.trapezoid(vals, ts, axis=0)
        best = max(best, float(np.max(integral)) / r)
    return best


@dataclass(frozen=True)
class XNorm:
    sup_part: float
    carleson_part: float

    @property
    def total(self) -> float:
        return self.sup_part + self.carleson_part


def x_seminorm(tr: Trajectory, balls: ParabolicBallSet | None = None) -> XNorm:
    """Both addends of the X semi-norm of a trajectory with gradient data.

    ``sup_part`` is ``max_k sqrt(t_k) ||grad v(t_k)||_inf``; ``carleson_part``
    is ``sup (r^-1 int_{Q_r} |grad v|^2)^(1/2)`` over ``balls`` (default: the
    dyadic ladder on the trajectory's grid).
    """
    if tr.gradients is None:
        raise InputError("x_seminorm needs gradient data")
    gm = tr.gradient_magnitude()
    sup_part = float(np.max(np.sqrt(tr.times) * gm.max(axis=1)))
    balls = ParabolicBallSet.dyadic(tr.grid) if balls is None else balls
    carleson = np.sqrt(_ball_sup(tr.times, gm**2, tr.grid, balls))
    return XNorm(sup_part, float(carleson))


def x_distance(a: Trajectory, b: Trajectory, balls: ParabolicBallSet | None = None) -> XNorm:
    """X semi-norm of the difference of two trajectories sampled identically."""
    if a.gradients is None or b.gradients is None:
        raise InputError("x_distance needs gradient data on both trajectories")
    if a.grid != b.grid or a.times.shape != b.times.shape or np.any(a.times != b.times):
        raise InputError("trajectories must share grid and times")
    return x_seminorm(Trajectory(a.times, a.values - b.values, a.grid, a.gradients - b.gradients), balls)


def y_norm(tr: Trajectory, balls: ParabolicBallSet | None = None) -> float:
    """``sup_t t ||v||_inf + sup r^-1 int_{Q_r} |v|`` for a scalar trajectory."""
    mag = tr.value_magnitude()
    first = float(np.max(tr.times * mag.max(axis=1)))
    balls = ParabolicBallSet.dyadic(tr.grid) if balls is None else balls
    return first + _ball_sup(tr.times, mag, tr.grid, balls)


# --------------------------------------------------------------------------
# exponential integral


def _e1_series(y):
    total = np.zeros_like(y)
    term = np.ones_like(y)
    for k in range(1, 60):
        term = term * (-y) / k
        total += term / k
    return -EULER_GAMMA - np.log(y) - total


def _e1_contfrac(y):
    # modified Lentz evaluation of exp(-y) / (y + 1 - 1/(y + 3 - 4/(y + 5 - ...)))
    tiny = 1e-300
    b = y + 1.0
    c = np.full_like(y, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, 500):
        an = -float(i * i)
        b = b + 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if np.all(np.abs(delta - 1.0) < 1e-16):
            break
    return h * np.exp(-y)


def e1(y):
    """Exponential integral ``E1(y) = int_y^inf exp(-z)/z dz`` for ``y > 0``.

    Power series on ``(0, 1]``, continued fraction beyond.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("e1 needs y > 0")
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat <= 1.0
    if np.any(small):
        out[small] = _e1_series(flat[small])
    if np.any(~small):
        out[~small] = _e1_contfrac(flat[~small])
    out = out.reshape(np.shape(arr))
    return float(out) if np.ndim(arr) == 0 else out


def e1_square_integral(lo: float, hi: float) -> float:
    """``int_lo^hi E1(z^2) dz`` by adaptive quadrature (log singularity at 0 handled)."""
    def integrand(z):
        return e1(z * z) if z != 0 else np.inf

    sign = 1.0
    if lo > hi:
        lo, hi, sign = hi, lo, -1.0
    pieces = [lo, hi] if (lo >= 0 or hi <= 0) else [lo, 0.0, hi]
    total = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        if a == b:
            continue
        if np.isinf(b):
            val, _ = integrate.quad(integrand, a, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
        else:
            val, _ = integrate.quad(integrand, a, b, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
    return sign * total


def carleson_selfsim(c: float, alpha: float, x: float, r: float) -> float:
    """``r^-1 int_0^{r^2} int_{x-r}^{x+r} |d_x m|^2`` for the self-similar profile of amplitude ``c``.

    With ``|d_x m|^2 = (c^2/t) exp(-alpha y^2 / 2t)`` the time integral is
    ``c^2 E1(alpha y^2 / 2 r^2)``; substituting ``z = sqrt(alpha/2) y / r``
    leaves a one-dimensional integral of ``E1(z^2)``.
    """
    if not r > 0:
        raise DomainError(f"radius must be positive, got {r!r}")
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")
    if c == 0:
        return 0.0
    s = np.sqrt(alpha / 2.0)
    a, b = s * (x / r - 1.0), s * (x / r + 1.0)
    return float(np.sqrt(2.0) * c * c / np.sqrt(alpha) * e1_square_integral(a, b))


def carleson_selfsim_bound(c: float, alpha: float) -> float:
    """Uniform bound ``2 sqrt(2 pi) c^2 / sqrt(alpha)`` on :func:`carleson_selfsim`."""
    return 2.0 * np.sqrt(2.0 * np.pi) * c * c / np.sqrt(alpha)
