"""Mild solutions of the projected (quasilinear dissipative Schrödinger) equation.

After stereographic projection the spin equation becomes

    i u_t + (beta - i alpha) u_xx = 2 (beta - i alpha) conj(u) u_x^2 / (1 + |u|^2),

which we write as ``u_t = (alpha + i beta) u_xx + g(u)`` and solve through
the Duhamel formula

    u(t) = S(t) u0 + int_0^t S(t - s) g(u(s)) ds.

Three solvers are provided:

* :func:`time_march`, exponential Euler / midpoint stepping from ``t0 > 0``;
* :func:`picard_solve` on a step datum, iterated in self-similar variables,
  where every Duhamel iterate keeps the form ``U(x / sqrt(t))``;
* :func:`picard_solve` on a grid datum, with trapezoidal product quadrature
  over a graded time mesh.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import signal

from . import norms, semigroup, selfsim, stereo
from .differences import central_d1, central_d2, time_derivative
from .errors import (BlowUpError, ConfigError, CoverageError, DomainError, InputError,
                     PoleProximityError)
from .norms import ParabolicBallSet, Trajectory
from .semigroup import ComplexField, GLParams, Grid
from .stereo import SpinField

BLOWUP_LIMIT = 1e6


# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class SolverConfig:
    """Time mesh and numerical knobs.

    The mesh starts at ``t0`` with step ``dt0`` and grows geometrically by
    ``ratio`` per step (the last step is clipped to land on ``T``).  With
    ``dt0 = t0 (ratio - 1)`` the nodes are ``t0 * ratio**k``.
    """

    t0: float = 0.1
    T: float = 1.0
    dt0: float = 1e-3
    ratio: float = 1.0
    scheme: str = "midpoint"
    tol: float = 1e-10
    boundary: str = "even"
    # Duhamel quadrature (self-similar Picard): Gauss-Legendre order per cell
    # and the number of dyadic cells graded toward the end point
    quad_order: int = 8
    quad_cells: int = 30
    # self-similar Picard grid
    profile_half_width: float = 16.0
    profile_points: int = 256
    max_steps: int = 100_000

    def __post_init__(self):
        if not (0 < self.t0 < self.T):
            raise ConfigError(f"need 0 < t0 < T, got t0={self.t0!r}, T={self.T!r}")
        if not self.dt0 > 0:
            raise ConfigError("dt0 must be positive")
        if not self.ratio >= 1:
            raise ConfigError("geometric ratio must be >= 1")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.scheme not in ("euler", "midpoint"):
            raise ConfigError(f"unknown scheme {self.scheme!r}")

    @classmethod
    def geometric(cls, t0: float, T: float, ratio: float, **kw) -> "SolverConfig":
        """Mesh ``t0 * ratio**k`` (nested under :meth:`refined`)."""
        return cls(t0=t0, T=T, dt0=t0 * (ratio - 1.0), ratio=ratio, **kw)

    def refined(self) -> "SolverConfig":
        """Roughly halve every step while keeping the old nodes."""
        q = math.sqrt(self.ratio)
        return replace(self, dt0=self.dt0 / (1.0 + q), ratio=q)

    def times(self) -> np.ndarray:
        out = [self.t0]
        dt = self.dt0
        t = self.t0
        while t < self.T * (1 - 1e-14):
            if len(out) > self.max_steps:
                raise ConfigError(f"time mesh needs more than {self.max_steps} steps")
            nxt = t + dt
            if nxt > self.T or self.T - nxt < 0.25 * dt:
                nxt = self.T
            out.append(nxt)
            t = nxt
            dt *= self.ratio
        return np.array(out)


@dataclass(frozen=True)
class WellPosednessBudget:
    """Smallness parameters and empirical stand-ins ``C_hat``, ``K_hat`` for the theory's constants."""

    delta: float
    eps0: float
    rho: float
    L: float = 0.0
    C_hat: float = 1.0
    K_hat: float = 1.0

    def __post_init__(self):
        if not (0 < self.delta <= 2):
            raise ConfigError("delta must lie in (0, 2]")
        if self.eps0 < 0 or not self.rho > 0 or self.L < 0:
            raise ConfigError("need eps0 >= 0, rho > 0, L >= 0")
        if not (self.C_hat > 0 and self.K_hat > 0):
            raise ConfigError("empirical constants must be positive")


@dataclass
class BudgetReport:
    llg_lhs: float
    llg_rhs: float
    dnls_lhs: float
    dnls_rhs: float
    rho_max: float
    eps0_max: float
    rho_best: float

    @property
    def llg_pass(self) -> bool:
        return self.llg_lhs <= self.llg_rhs * (1 + 1e-12)

    @property
    def dnls_pass(self) -> bool:
        return self.dnls_lhs <= self.dnls_rhs * (1 + 1e-12)

    @property
    def llg_margin(self) -> float:
        return self.llg_rhs - self.llg_lhs

    @property
    def dnls_margin(self) -> float:
        return self.dnls_rhs - self.dnls_lhs

    @property
    def passed(self) -> bool:
        return self.llg_pass and self.dnls_pass


def check_budget(b: WellPosednessBudget) -> BudgetReport:
    """Evaluate both smallness conditions and the bounds they imply.

    With ``a = 8 K^4 C`` the spin condition
    ``a delta^-4 (rho + 8 eps0 / delta^2)^2 <= rho`` is solvable in ``rho``
    iff ``eps0 <= delta^6 / (32 a)``; any admissible ``rho`` is at most
    ``delta^4 / a``, and ``rho_best`` is the minimiser of the slack.
    """
    d = b.delta
    a = 8.0 * b.K_hat**4 * b.C_hat
    eps = 8.0 * b.eps0 / d**2
    return BudgetReport(
        llg_lhs=a / d**4 * (b.rho + eps) ** 2,
        llg_rhs=b.rho,
        dnls_lhs=8.0 * b.C_hat * (b.rho + eps) ** 2,
        dnls_rhs=b.rho,
        rho_max=d**4 / a,
        eps0_max=d**6 / (32.0 * a),
        rho_best=max(d**4 / (2 * a) - eps, 0.0),
    )


@dataclass
class PicardState:
    """Iteration record: ``differences[k]`` is the X distance between iterates ``k`` and ``k+1``."""

    iterate: int = 0
    differences: list = field(default_factory=list)
    converged: bool = False
    diverged: bool = False
    message: str = ""

    @property
    def factors(self) -> list:
        d = self.differences
        return [d[k + 1] / d[k] for k in range(len(d) - 1) if d[k] > 0]

    @property
    def contraction_factor(self) -> float:
        """Largest ratio of successive differences above the rounding floor."""
        d = self.differences
        f = [d[k + 1] / d[k] for k in range(len(d) - 1) if d[k] > 1e-13]
        return float(max(f)) if f else 0.0


@dataclass(frozen=True)
class StepData:
    """Two-valued datum ``a_plus`` on ``x > 0`` and ``a_minus`` on ``x < 0``."""

    a_plus: complex
    a_minus: complex

    @classmethod
    def from_spins(cls, a_plus, a_minus) -> "StepData":
        return cls(complex(stereo.project_array(np.asarray(a_plus, float))),
                   complex(stereo.project_array(np.asarray(a_minus, float))))


# --------------------------------------------------------------------------
# nonlinearity and derivatives


def g_nonlinearity(u, grad_u, p: GLParams):
    """``-2i (beta - i alpha) conj(u) u_x^2 / (1 + |u|^2)``; bounded by ``|u_x|^2``."""
    u = np.asarray(u)
    du = np.asarray(grad_u)
    pref = -2j * complex(p.beta, -p.alpha)
    val = pref * np.conj(u) * du * du / (1.0 + np.abs(u) ** 2)
    return complex(val) if np.ndim(val) == 0 else val


def _dx(values, grid: Grid, boundary: str):
    return semigroup.spectral_derivative(values, grid.spacing, 1, boundary)


def spin_gradient(u, du):
    """``d/dx`` of the inverse projection, from ``u`` and ``u_x``."""
    u = np.asarray(u)
    du = np.asarray(du)
    den = 1.0 + np.abs(u) ** 2
    dmod = 2.0 * np.real(np.conj(u) * du)
    dz = 2.0 * du / den - 2.0 * u * dmod / den**2
    return np.stack([dz.real, dz.imag, -2.0 * dmod / den**2], axis=-1)


# --------------------------------------------------------------------------
# exponential time stepping


def _check_blowup(u, t):
    if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_LIMIT:
        raise BlowUpError(f"solution left the admissible range at t = {t:.6g}", last_time=t, state=u)


def time_march(u_at_t0: ComplexField, cfg: SolverConfig, p: GLParams) -> Trajectory:
    """March from ``cfg.t0`` to ``cfg.T`` on the mesh of ``cfg``.

    Euler: ``u+ = S(dt)(u + dt g(u))``.  Midpoint:
    ``u* = S(dt/2)(u + dt/2 g(u))``, ``u+ = S(dt) u + dt S(dt/2) g(u*)``.
    Returns a trajectory with spectral gradients.

    Raises
    ------
    BlowUpError
        On non-finite samples or ``|u| > 1e6``; carries the last good time and state.
    """
    grid = u_at_t0.grid
    h = grid.spacing
    bc = cfg.boundary
    times = cfg.times()
    u = np.array(u_at_t0.values, dtype=complex)
    vals = [u.copy()]

    def g_of(v):
        return g_nonlinearity(v, _dx(v, grid, bc), p)

    for k in range(times.size - 1):
        dt = times[k + 1] - times[k]
        if cfg.scheme == "euler":
            new = semigroup.apply_array(u + dt * g_of(u), h, dt, p, bc)
        else:
            half = semigroup.apply_array(u + 0.5 * dt * g_of(u), h, 0.5 * dt, p, bc)
            new = (semigroup.apply_array(u, h, dt, p, bc)
                   + dt * semigroup.apply_array(g_of(half), h, 0.5 * dt, p, bc))
        try:
            _check_blowup(new, times[k + 1])
        except BlowUpError as err:
            err.last_time = float(times[k])
            err.state = u.copy()
            raise
        u = new
        vals.append(u.copy())
    values = np.stack(vals)
    grads = _dx(values.T, grid, bc).T
    return Trajectory(times, values, grid, grads)


@dataclass
class LLGResult:
    spins: Trajectory
    projected: Trajectory
    min_m3: float
    m3_bound: float | None


def llg_solve(m_at_t0: SpinField, delta: float, cfg: SolverConfig, p: GLParams,
              pole_margin: float = 1e-8, budget: WellPosednessBudget | None = None) -> LLGResult:
    """Project, march, and map back to the sphere.

    ``min_m3`` is the smallest third component met along the flow; when a
    ``budget`` is given, ``m3_bound = -1 + 2 / (1 + K^2 (rho + 1/delta)^2)``
    is reported next to it.

    Raises
    ------
    PoleProximityError
        If the initial field violates the margin ``delta`` or the flow comes
        within ``pole_margin`` of the South Pole; the first offending
        ``(x, t)`` is attached.
    """
    u0 = stereo.project(m_at_t0, delta)
    tr = time_march(u0, cfg, p)
    m = stereo.inverse_project_array(tr.values)
    m /= np.linalg.norm(m, axis=-1, keepdims=True)
    low = m[..., 2] < -1.0 + pole_margin
    if np.any(low):
        k, j = (int(i[0]) for i in np.nonzero(low))
        raise PoleProximityError(
            f"flow reached the South Pole neighbourhood at x = {tr.grid.x[j]:.6g}, t = {tr.times[k]:.6g}",
            x=float(tr.grid.x[j]), t=float(tr.times[k]))
    dm = spin_gradient(tr.values, tr.gradients)
    spins = Trajectory(tr.times, m, tr.grid, dm)
    bound = None
    if budget is not None:
        bound = -1.0 + 2.0 / (1.0 + budget.K_hat**2 * (budget.rho + 1.0 / delta) ** 2)
    return LLGResult(spins, tr, float(np.min(m[..., 2])), bound)


def dirichlet_energies(tr: Trajectory) -> np.ndarray:
    """``int |d_x v|^2 dx`` at every sample time (trapezoid)."""
    g2 = tr.gradient_magnitude() ** 2
    return np.trapezoid(g2, dx=tr.grid.spacing, axis=1)


# --------------------------------------------------------------------------
# residuals


def _interior(tr: Trajectory):
    if len(tr) < 3:
        raise InputError("residual needs at least 3 time samples")
    return time_derivative(tr.values, tr.times)


def residual_dnls(tr: Trajectory, p: GLParams, order: int = 6) -> float:
    """Max residual of the projected equation (sixth-order space, central time differences).

    Finite differences rather than spectral derivatives are used because
    solutions tend to different constants at the two ends of the window.
    """
    idx, ut = _interior(tr)
    h = tr.grid.spacing
    cut = order // 2
    u = tr.values[idx]
    ux = central_d1(u.T, h, order).T
    uxx = central_d2(u.T, h, order).T
    ui = u[:, cut:-cut]
    c = complex(p.beta, -p.alpha)
    res = (1j * ut[:, cut:-cut] + c * uxx
           - 2 * c * np.conj(ui) * ux**2 / (1 + np.abs(ui) ** 2))
    return float(np.max(np.abs(res)))


def residual_llg(tr: Trajectory, p: GLParams, order: int = 6) -> float:
    """Max of ``|m_t - beta m x m_xx + alpha m x (m x m_xx)|`` on the interior."""
    if not tr.is_spin:
        raise InputError("residual_llg needs a spin trajectory")
    idx, mt = _interior(tr)
    h = tr.grid.spacing
    cut = order // 2
    m = tr.values[idx]
    mxx = np.moveaxis(central_d2(np.moveaxis(m, 1, 0), h, order), 0, 1)
    mi = m[:, cut:-cut]
    cross = np.cross(mi, mxx)
    res = mt[:, cut:-cut] - p.beta * cross + p.alpha * np.cross(mi, cross)
    return float(np.max(np.linalg.norm(res, axis=-1)))


# --------------------------------------------------------------------------
# self-similar Picard iteration for step data


class ScaledTransform:
    """``h sum_j G_j exp(-i sigma xi_k y_j)`` for fixed ``sigma`` nodes, by chirp-z transforms.

    Output is in FFT order of ``xi``; one evaluation costs ``O(n log n)`` per node.
    """

    def __init__(self, grid: Grid, sigmas):
        n, h = grid.n, grid.spacing
        xi = semigroup.wavenumbers(n, h)
        shift = np.fft.fftshift(xi)
        self.order = np.argsort(np.argsort(xi))
        self.czts = [signal.CZT(n, n, w=np.exp(-1j * sg * (shift[1] - shift[0]) * h),
                                a=np.exp(1j * sg * shift[0] * h)) for sg in sigmas]
        self.phases = [h * np.exp(-1j * sg * shift * grid.x[0]) for sg in sigmas]

    def __call__(self, k: int, values):
        return (self.phases[k] * self.czts[k](values))[self.order]


def _graded_nodes(order: int, cells: int):
    """Gauss-Legendre nodes on ``[0, 1]`` with dyadic cells piling up at 1."""
    edges = np.concatenate([[0.0], 1.0 - 0.5 ** np.arange(1, cells), [1.0]])
    x, w = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (b - a) * x + 0.5 * (a + b))
        weights.append(0.5 * (b - a) * w)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass
class SelfSimilarSolution:
    """``u(x, t) = U(x / sqrt t)`` with ``U = S(1) u0 + D`` and ``D`` decaying."""

    data: StepData
    params: GLParams
    grid: Grid
    correction: np.ndarray
    correction_hat: np.ndarray

    def _xi(self):
        return semigroup.wavenumbers(self.grid.n, self.grid.spacing)

    def base(self, y):
        return semigroup.apply_to_step(self.data.a_plus, self.data.a_minus, y, 1.0, self.params)

    def base_gradient(self, y):
        return semigroup.step_gradient(self.data.a_plus, self.data.a_minus, y, 1.0, self.params)

    def _trig(self, y, derivative: bool):
        # trigonometric interpolation of D from its (continuous) transform samples
        xi = self._xi()
        y = np.atleast_1d(np.asarray(y, dtype=float))
        spec = self.correction_hat * (1j * xi if derivative else 1.0)
        n = self.grid.n
        if n % 2 == 0:
            spec = spec.copy()
            spec[n // 2] = 0.0
        out = np.empty(y.shape, dtype=complex)
        for a in range(0, y.size, 2048):
            out[a:a + 2048] = np.exp(1j * np.outer(y[a:a + 2048], xi)) @ spec
        # D has decayed at the window edges; do not let the interpolant wrap around
        lo, hi = self.grid.x[0], self.grid.x[-1] + self.grid.spacing
        out[(y < lo) | (y >= hi)] = 0.0
        return out / (n * self.grid.spacing)

    def profile(self, y):
        return self.base(y) + self._trig(y, False)

    def profile_gradient(self, y):
        return self.base_gradient(y) + self._trig(y, True)

    def at(self, x, t):
        return self.profile(np.asarray(x) / np.sqrt(t))

    def gradient_at(self, x, t):
        return self.profile_gradient(np.asarray(x) / np.sqrt(t)) / np.sqrt(t)

    def trajectory(self, grid: Grid, times) -> Trajectory:
        times = np.asarray(times, float)
        vals = np.stack([self.at(grid.x, t) for t in times])
        grads = np.stack([self.gradient_at(grid.x, t) for t in times])
        return Trajectory(times, vals, grid, grads)


def selfsim_x_norm(w, dw, grid: Grid, centers=None) -> norms.XNorm:
    """X norm (with sup term) of a self-similar field ``W(x / sqrt t)`` from its profile.

    For such fields ``sqrt(t) |d_x W|_inf = sup |W'|`` for every ``t`` and,
    by scaling, the Carleson part reduces to unit balls:
    ``r^-1 int_{Q_r(x)} |d_x W|^2 = 2 int |W'(z)|^2 l(z) / |z| dz`` where
    ``l(z)`` is the length of ``[0, z] \\cap [x - 1, x + 1]``.

    ``sup_part`` includes ``sup |W|``.
    """
    z = grid.x
    dens = np.abs(dw) ** 2
    if centers is None:
        centers = z[np.abs(z) <= grid.extent - 1.0][::2]
    cen = np.asarray(centers, float)[:, None]
    zz = z[None, :]
    lo = np.minimum(zz, 0.0)
    hi = np.maximum(zz, 0.0)
    overlap = np.clip(np.minimum(hi, cen + 1) - np.maximum(lo, cen - 1), 0.0, None)
    with np.errstate(invalid="ignore", divide="ignore"):
        weight = np.where(zz != 0, overlap / np.abs(zz), (np.abs(cen) < 1).astype(float))
    carleson = 2.0 * grid.spacing * (weight * dens[None, :]).sum(axis=1)
    sup_part = float(np.max(np.abs(w)) + np.max(np.abs(dw)))
    return norms.XNorm(sup_part, float(np.sqrt(np.max(carleson))))


def _picard_selfsim(data: StepData, cfg: SolverConfig, p: GLParams, max_iters: int):
    grid = Grid.symmetric(cfg.profile_half_width, cfg.profile_points)
    y = grid.x
    h = grid.spacing
    n = grid.n
    xi = semigroup.wavenumbers(n, h)
    sig, wts = _graded_nodes(cfg.quad_order, cfg.quad_cells)
    d = p.diffusion
    base = semigroup.apply_to_step(data.a_plus, data.a_minus, y, 1.0, p)
    dbase = semigroup.step_gradient(data.a_plus, data.a_minus, y, 1.0, p)
    phase0 = np.exp(1j * xi * y[0])

    transform = ScaledTransform(grid, sig)
    damps = [np.exp(-d * xi**2 * (1.0 - sg * sg)) for sg in sig]

    def duhamel(U, dU):
        G = g_nonlinearity(U, dU, p)
        Dhat = np.zeros(n, dtype=complex)
        for k, sg in enumerate(sig):
            # continuous transform of G sampled at the frequencies sigma * xi
            Ghat = transform(k, G)
            Dhat += 2.0 * wts[k] * Ghat * damps[k]
        spec = Dhat * phase0
        D = np.fft.ifft(spec) / h
        if n % 2 == 0:
            spec = spec.copy()
            spec[n // 2] = 0
        dD = np.fft.ifft(1j * xi * spec) / h
        return D, dD, Dhat

    state = PicardState()
    D = np.zeros(n, dtype=complex)
    dD = np.zeros(n, dtype=complex)
    Dhat = np.zeros(n, dtype=complex)
    grow = 0
    for it in range(1, max_iters + 1):
        D_new, dD_new, Dhat_new = duhamel(base + D, dbase + dD)
        if not (np.all(np.isfinite(D_new)) and np.max(np.abs(D_new)) < BLOWUP_LIMIT):
            state.diverged = True
            state.message = f"iterate {it} left the admissible range"
            break
        dist = selfsim_x_norm(D_new - D, dD_new - dD, grid).total
        state.differences.append(dist)
        state.iterate = it
        D, dD, Dhat = D_new, dD_new, Dhat_new
        if dist < cfg.tol:
            state.converged = True
            break
        if len(state.differences) > 1 and dist > state.differences[-2]:
            grow += 1
            if grow >= 3:
                state.diverged = True
                state.message = (f"X distance grew for 3 consecutive iterates "
                                 f"(factor {state.contraction_factor:.3g})")
                break
        else:
            grow = 0
    if not state.converged and not state.diverged:
        state.message = f"no convergence in {max_iters} iterations"
    return SelfSimilarSolution(data, p, grid, D, Dhat), state


# --------------------------------------------------------------------------
# Duhamel operator on sampled trajectories


def resolved_time(grid: Grid, p: GLParams, points: float = 4.0) -> float:
    """Smallest time at which a self-similar profile of unit width spans ``points`` cells."""
    return (points * grid.spacing) ** 2 / p.alpha


def _selfsimilar_head(G, grid: Grid, s_r: float, t: float, p: GLParams, cfg: SolverConfig):
    """``int_0^{s_r} S(t - s) g(s) ds`` assuming ``g(x, s) = (s_r/s) G(x sqrt(s_r/s))``.

    In Fourier variables this is
    ``2 s_r int_0^1 Ghat(sigma xi) exp(-(alpha + i beta) xi^2 (t - s_r sigma^2)) d sigma``.
    """
    sig, wts = _graded_nodes(cfg.quad_order, cfg.quad_cells)
    xi = semigroup.wavenumbers(grid.n, grid.spacing)
    transform = ScaledTransform(grid, sig)
    d = p.diffusion
    spec = np.zeros(grid.n, dtype=complex)
    for k, sg in enumerate(sig):
        spec += wts[k] * transform(k, G) * np.exp(-d * xi**2 * (t - s_r * sg * sg))
    spec *= 2.0 * s_r * np.exp(1j * xi * grid.x[0])
    return np.fft.ifft(spec) / grid.spacing


def duhamel_apply(u0, traj: Trajectory, t: float, cfg: SolverConfig, p: GLParams,
                  coverage: float = 1e-6) -> np.ndarray:
    """``S(t) u0 + int_0^t S(t - s) g(u(s)) ds`` on the trajectory's grid.

    The time integral is a trapezoid rule in ``s`` over the trajectory's
    samples (which should be graded toward ``t``).  The initial slab is
    closed differently for the two kinds of data:

    * grid data: a rectangle ``s_1 S(t) g(u(s_1))``; the first sample must
      lie below ``coverage * t``;
    * step data: below :func:`resolved_time` the grid cannot represent
      ``g(s)`` (its width is ``~ sqrt(s)``), so the slab ``[0, s_r]`` up to
      the first resolved sample ``s_r`` uses the self-similar rescaling of
      ``g(s_r)``, exact for self-similar trajectories.

    Raises
    ------
    CoverageError
        If ``t`` is not a sample time, or grid data are not covered near 0.
    """
    grid = traj.grid
    h = grid.spacing
    bc = cfg.boundary
    times = traj.times
    k_end = int(np.searchsorted(times, t * (1 + 1e-12), side="right"))
    if k_end == 0 or abs(times[k_end - 1] - t) > 1e-12 * t:
        raise CoverageError(f"t = {t!r} is not a sample time of the trajectory")
    step = isinstance(u0, StepData)
    if step:
        out = semigroup.apply_to_step(u0.a_plus, u0.a_minus, grid.x, t, p).astype(complex)
    else:
        if times[0] > coverage * t:
            raise CoverageError(
                f"first sample {times[0]:.3g} does not reach within {coverage:g} * t of 0")
        vals = u0.values if isinstance(u0, ComplexField) else np.asarray(u0, complex)
        out = semigroup.apply_array(vals, h, t, p, bc)
    grads = traj.gradients if traj.gradients is not None else _dx(traj.values.T, grid, bc).T
    if step:
        k0 = min(int(np.searchsorted(times, resolved_time(grid, p))), k_end - 1)
    else:
        k0 = 0
    s = times[k0:k_end]
    G = g_nonlinearity(traj.values[k0:k_end], grads[k0:k_end], p)
    if not np.any(G):
        return out
    if step:
        head = _selfsimilar_head(G[0], grid, s[0], t, p, cfg)
    else:
        head = s[0] * semigroup.apply_array(G[0], h, t - s[0], p, bc)
    integrand = np.stack([semigroup.apply_array(G[j], h, t - s[j], p, bc) for j in range(s.size)])
    total = head
    if s.size > 1:
        total = total + np.trapezoid(integrand, s, axis=0)
    return out + total


def graded_times(t_end: float, first: float, per_decade: int = 40, last_gap: float = 1e-6):
    """Samples geometric in ``s`` from ``first`` to ``t_end / 2`` and geometric in ``t_end - s`` beyond."""
    lead = np.geomspace(first, 0.5 * t_end, int(per_decade * np.log10(0.5 * t_end / first)) + 2)
    gaps = np.geomspace(0.5 * t_end, last_gap * t_end, int(per_decade * np.log10(0.5 / last_gap)) + 2)
    return np.unique(np.concatenate([lead, t_end - gaps[1:], [t_end]]))


def _picard_grid(u0: ComplexField, cfg: SolverConfig, p: GLParams, max_iters: int,
                 times=None):
    grid = u0.grid
    h = grid.spacing
    bc = cfg.boundary
    if times is None:
        times = graded_times(cfg.T, cfg.T * 1e-4, per_decade=10, last_gap=1e-4)
    times = np.asarray(times, float)
    vals = np.stack([semigroup.apply_array(u0.values, h, t, p, bc) for t in times])
    tr = Trajectory(times, vals, grid, _dx(vals.T, grid, bc).T)
    state = PicardState()
    grow = 0
    balls = ParabolicBallSet.dyadic(grid)
    for it in range(1, max_iters + 1):
        new_vals = np.stack([duhamel_apply(u0, tr, t, cfg, p, coverage=1.0) for t in times])
        new = Trajectory(times, new_vals, grid, _dx(new_vals.T, grid, bc).T)
        diff = norms.x_distance(new, tr, balls)
        dist = float(np.max(np.abs(new_vals - tr.values))) + diff.total
        state.differences.append(dist)
        state.iterate = it
        tr = new
        if dist < cfg.tol:
            state.converged = True
            break
        if len(state.differences) > 1 and dist > state.differences[-2]:
            grow += 1
            if grow >= 3:
                state.diverged = True
                state.message = "X distance grew for 3 consecutive iterates"
                break
        else:
            grow = 0
    return tr, state


def picard_solve(u0, cfg: SolverConfig, p: GLParams, max_iters: int = 50,
                 grid: Grid | None = None, times=None):
    """Iterate the Duhamel map from ``S(t) u0``.

    Parameters
    ----------
    u0 : StepData or ComplexField
        Step data are iterated in self-similar variables; the returned
        trajectory samples the limit on ``grid`` at ``times`` (default: the
        mesh of ``cfg``).  Grid data are iterated on a graded time mesh.

    Returns
    -------
    trajectory : Trajectory
    state : PicardState
        For step data ``state.solution`` holds the :class:`SelfSimilarSolution`.
    """
    if isinstance(u0, StepData):
        sol, state = _picard_selfsim(u0, cfg, p, max_iters)
        grid = Grid.symmetric(20.0, 512) if grid is None else grid
        times = cfg.times() if times is None else times
        state.solution = sol
        return sol.trajectory(grid, times), state
    if isinstance(u0, ComplexField):
        return _picard_grid(u0, cfg, p, max_iters, times)
    raise InputError("u0 must be StepData or ComplexField")


# --------------------------------------------------------------------------
# stability of self-similar solutions


def smooth_bump(x, center: float = 0.0, width: float = 1.0):
    """``exp(1 - 1/(1 - r^2))`` on ``|r| < 1`` with ``r = (x - center)/width``; peak 1."""
    r = (np.asarray(x, float) - center) / width
    out = np.zeros_like(r)
    inside = np.abs(r) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - r[inside] ** 2))
    return out


@dataclass
class StabilityReport:
    c: float
    alpha: float
    eta: float
    perturbation_sup: float
    x_distance: float
    ratio: float
    gradient_ratio: float
    hypothesis_bound: float
    within_hypothesis: bool
    min_m3: float


def stability_experiment(c: float, alpha: float, eta: float, cfg: SolverConfig,
                         grid: Grid | None = None, delta: float = 0.5, profile=None,
                         balls: ParabolicBallSet | None = None,
                         bump_width: float = 1.0) -> StabilityReport:
    """Perturb the self-similar solution at ``cfg.t0`` and measure the response.

    The perturbed datum is ``m + eta * bump * e3`` renormalized to the
    sphere.  Both data are marched with :func:`llg_solve`; the report holds
    the X distance (sup part plus Carleson part) divided by ``eta`` and the
    ratio ``max_t sqrt(t) |d_x m - d_x m_ref|_inf / eta``.  ``eta`` above
    ``c sqrt(pi) / (2 sqrt(alpha))`` is flagged, not refused.
    """
    if eta < 0:
        raise DomainError("eta must be nonnegative")
    p = GLParams(alpha)
    grid = Grid.symmetric(20.0, 1024) if grid is None else grid
    prof = selfsim.build_profile(c, alpha, 1e-12) if profile is None else profile
    bound = c * np.sqrt(np.pi) / (2.0 * np.sqrt(alpha))
    if eta > bound:
        warnings.warn(f"eta = {eta:g} exceeds the hypothesis bound {bound:.4g}", RuntimeWarning,
                      stacklevel=2)
    ref0 = selfsim.evaluate_m(prof, grid.x, cfg.t0)
    if eta == 0:
        return StabilityReport(c, alpha, 0.0, 0.0, 0.0, 0.0, 0.0, bound, True,
                               float(np.min(ref0[:, 2])))
    pert = ref0 + eta * smooth_bump(grid.x, 0.0, bump_width)[:, None] * np.array([0.0, 0.0, 1.0])
    pert /= np.linalg.norm(pert, axis=1, keepdims=True)
    ref = llg_solve(SpinField.normalized(ref0, grid), delta, cfg, p)
    per = llg_solve(SpinField.normalized(pert, grid), delta, cfg, p)
    a, b = per.spins, ref.spins
    if balls is None:
        balls = ParabolicBallSet.dyadic(grid, min_radius=max(np.sqrt(a.times[1]), 2 * grid.spacing))
    xd = norms.x_distance(a, b, balls)
    sup_diff = float(np.max(np.linalg.norm(a.values - b.values, axis=-1)))
    total = sup_diff + xd.total
    sup0 = float(np.max(np.linalg.norm(pert - ref0, axis=1)))
    gdiff = np.linalg.norm(a.gradients - b.gradients, axis=-1)
    gratio = float(np.max(np.sqrt(a.times) * gdiff.max(axis=1))) / eta
    return StabilityReport(c, alpha, eta, sup0, total, total / eta, gratio, bound,
                           eta <= bound, min(per.min_m3, ref.min_m3))
