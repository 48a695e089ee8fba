"""Random analytic spin fields with closed-form derivatives.

A field is described by polar and azimuthal angles
``m = (sin th cos ph, sin th sin ph, cos th)`` with
``th(x) = th_max * (1 + sin(a1 x + b1) cos(a2 x + b2)) / 2`` and
``ph(x) = c1 sin(a3 x + b3) + c2 x``, so ``m3 >= cos(th_max)``.
Its stereographic image is ``tan(th / 2) exp(i ph)``; every quantity below
is evaluated from these formulas, independently of the library.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AnalyticField:
    m: np.ndarray      # (..., 3)
    dm: np.ndarray     # (..., 3)
    u: np.ndarray      # complex
    du: np.ndarray     # complex


def random_angles(rng, count: int, th_max: float):
    a = rng.uniform(0.2, 3.0, size=(count, 3))
    b = rng.uniform(0.0, 2 * np.pi, size=(count, 3))
    c = np.column_stack([rng.uniform(-3, 3, count), rng.uniform(-1, 1, count)])
    # a quarter of the draws are pinned at the margin (th reaches th_max)
    scale = np.where(rng.uniform(size=count) < 0.25, 1.0, rng.uniform(0.1, 1.0, count)) * th_max
    return a, b, c, scale


def evaluate(x, a, b, c, scale) -> AnalyticField:
    x = np.asarray(x, float)[None, :]
    col = (lambda v: v[:, None])
    s1, c1 = np.sin(col(a[:, 0]) * x + col(b[:, 0])), np.cos(col(a[:, 0]) * x + col(b[:, 0]))
    s2, c2 = np.sin(col(a[:, 1]) * x + col(b[:, 1])), np.cos(col(a[:, 1]) * x + col(b[:, 1]))
    s3, c3 = np.sin(col(a[:, 2]) * x + col(b[:, 2])), np.cos(col(a[:, 2]) * x + col(b[:, 2]))
    th = col(scale) * 0.5 * (1 + s1 * c2)
    dth = col(scale) * 0.5 * (col(a[:, 0]) * c1 * c2 - col(a[:, 1]) * s1 * s2)
    ph = col(c[:, 0]) * s3 + col(c[:, 1]) * x
    dph = col(c[:, 0]) * col(a[:, 2]) * c3 + col(c[:, 1])
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    m = np.stack([st * cp, st * sp, ct], axis=-1)
    dm = np.stack([ct * cp * dth - st * sp * dph,
                   ct * sp * dth + st * cp * dph,
                   -st * dth], axis=-1)
    half = np.tan(th / 2)
    u = half * np.exp(1j * ph)
    du = (0.5 * dth / np.cos(th / 2) ** 2 + 1j * dph * half) * np.exp(1j * ph)
    return AnalyticField(m, dm, u, du)


def field_pairs(rng, count: int, delta: float, x):
    """``count`` independent pairs of fields with ``m3 >= -1 + delta``."""
    th_max = float(np.arccos(-1.0 + delta))
    first = evaluate(x, *random_angles(rng, count, th_max))
    second = evaluate(x, *random_angles(rng, count, th_max))
    return first, second
