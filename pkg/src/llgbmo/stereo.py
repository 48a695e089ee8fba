"""Stereographic projection from the South Pole and its inverse."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError, PoleProximityError
from .semigroup import ComplexField, Grid

UNIT_TOL = 1e-12


@dataclass(frozen=True)
class SpinField:
    """Unit 3-vectors sampled on a uniform grid; ``values`` has shape ``(n, 3)``."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.n, 3):
            raise InputError(f"expected shape ({self.grid.n}, 3), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise InputError("SpinField samples must be finite")
        dev = np.max(np.abs(np.linalg.norm(v, axis=1) - 1.0))
        if dev > UNIT_TOL:
            raise InputError(f"spin samples must be unit vectors (max deviation {dev:.2e})")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def normalized(cls, values, grid: Grid) -> "SpinField":
        v = np.asarray(values, dtype=float)
        return cls(v / np.linalg.norm(v, axis=1, keepdims=True), grid)

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


def project_array(m: np.ndarray) -> np.ndarray:
    """``(m1 + i m2) / (1 + m3)`` along the last axis, without pole checks."""
    m = np.asarray(m, dtype=float)
    return (m[..., 0] + 1j * m[..., 1]) / (1.0 + m[..., 2])


def inverse_project_array(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    a2 = np.abs(u) ** 2
    den = 1.0 + a2
    return np.stack([2.0 * u.real / den, 2.0 * u.imag / den, (1.0 - a2) / den], axis=-1)


def project(m: SpinField, delta: float) -> ComplexField:
    """Project a spin field that stays ``delta`` away from the South Pole.

    Raises
    ------
    PoleProximityError
        If some sample has ``m3 < -1 + delta``; the message names the first
        offending coordinate.
    """
    if not (0.0 < delta <= 2.0):
        raise DomainError(f"delta must lie in (0, 2], got {delta!r}")
    m3 = m.values[:, 2]
    bad = np.nonzero(m3 < -1.0 + delta)[0]
    if bad.size:
        j = int(bad[0])
        xj = float(m.x[j])
        raise PoleProximityError(
            f"m3 = {m3[j]:.6g} < -1 + delta = {-1 + delta:.6g} at x = {xj:.6g}", x=xj)
    return ComplexField(project_array(m.values), m.grid)


def inverse_project(u: ComplexField) -> SpinField:
    m = inverse_project_array(u.values)
    # the formula is unit up to rounding; normalize away the last ulp
    return SpinField.normalized(m, u.grid)


def min_m3_bound(sup_u: float) -> float:
    """Lower bound ``-1 + 2/(1 + M^2)`` on ``m3`` when ``|u| <= M``."""
    return -1.0 + 2.0 / (1.0 + sup_u**2)


def check_rotation(R, tol: float = 1e-12) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise InputError("rotation must be a 3x3 matrix")
    if np.max(np.abs(R.T @ R - np.eye(3))) > tol:
        raise InputError("matrix is not orthogonal")
    if abs(np.linalg.det(R) - 1.0) > tol:
        raise InputError("matrix is not a proper rotation (det != 1)")
    return R


def rotate(m: SpinField, R) -> SpinField:
    R = check_rotation(R)
    return SpinField.normalized(m.values @ R.T, m.grid)


def rotation_to_north(q) -> np.ndarray:
    """A proper rotation taking the unit vector ``q`` to ``(0, 0, 1)``.

    Combined with :func:`project`, this lets fields concentrated near any
    pole other than the South Pole be projected.
    """
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q)
    north = np.array([0.0, 0.0, 1.0])
    axis = np.cross(q, north)
    s = np.linalg.norm(axis)
    cth = float(q @ north)
    if s < 1e-15:
        return np.eye(3) if cth > 0 else np.diag([1.0, -1.0, -1.0])
    k = axis / s
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + s * K + (1 - cth) * (K @ K)
