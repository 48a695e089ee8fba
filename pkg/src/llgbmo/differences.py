"""Finite-difference stencils shared by the residual checks."""
from __future__ import annotations

import numpy as np

from .errors import InputError


def central_d1(v, h: float, order: int = 6):
    """Central first derivative along axis 0; drops ``order // 2`` samples per end."""
    v = np.asarray(v)
    if order == 6:
        return (-v[:-6] + 9 * v[1:-5] - 45 * v[2:-4] + 45 * v[4:-2] - 9 * v[5:-1] + v[6:]) / (60 * h)
    if order == 4:
        return (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    raise InputError("supported orders are 4 and 6")


def central_d2(v, h: float, order: int = 6):
    """Central second derivative along axis 0; drops ``order // 2`` samples per end."""
    v = np.asarray(v)
    if order == 6:
        return (2 * v[:-6] - 27 * v[1:-5] + 270 * v[2:-4] - 490 * v[3:-3]
                + 270 * v[4:-2] - 27 * v[5:-1] + 2 * v[6:]) / (180 * h * h)
    if order == 4:
        return (-v[:-4] + 16 * v[1:-3] - 30 * v[2:-2] + 16 * v[3:-1] - v[4:]) / (12 * h * h)
    raise InputError("supported orders are 4 and 6")


def time_derivative(values, times):
    """Central time derivative at interior samples.

    Uniform times with at least 5 samples get the fourth-order stencil (two
    samples dropped per end); otherwise the three-point nonuniform formula is
    used (one sample dropped per end).

    Returns
    -------
    index : ndarray
        Indices of the samples where the derivative is returned.
    derivative : ndarray
    """
    v = np.asarray(values)
    t = np.asarray(times, dtype=float)
    if t.size < 3:
        raise InputError("need at least 3 time samples")
    dt = np.diff(t)
    if t.size >= 5 and np.max(np.abs(dt - dt[0])) <= 1e-9 * dt[0]:
        return np.arange(2, t.size - 2), central_d1(v, dt[0], order=4)
    shape = (-1,) + (1,) * (v.ndim - 1)
    h0 = dt[:-1].reshape(shape)
    h1 = dt[1:].reshape(shape)
    d = (-h1 / (h0 * (h0 + h1)) * v[:-2] + (h1 - h0) / (h0 * h1) * v[1:-1]
         + h0 / (h1 * (h0 + h1)) * v[2:])
    return np.arange(1, t.size - 1), d
