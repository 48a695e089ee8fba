"""Self-similar expanders ``m(x, t) = f(x / sqrt(t))`` built from a Frenet frame.

The profile ``f`` is the unit tangent of a space curve whose curvature and
torsion at arclength ``s`` are

    kappa(s) = c exp(-alpha s^2 / 4),    tau(s) = beta s / 2,

so it is obtained by integrating

    f' = kappa n,    n' = -kappa f + tau b,    b' = -tau n

from the frame ``(e1, e2, e3)`` at ``s = 0``.  Since ``|f'| = kappa`` is
integrable, ``f`` has limits ``A+`` and ``A-`` at ``+/- infinity``; the
tail integral of ``kappa`` beyond ``s`` bounds the distance to the limit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .differences import central_d1, central_d2
from .errors import BracketError, DomainError, InputError, IntegrationError
from .semigroup import Grid
from .stereo import SpinField

SQRT_PI = float(np.sqrt(np.pi))
MAX_NODE_GAP = 0.02


def _beta(alpha: float) -> float:
    return float(np.sqrt(max(0.0, 1.0 - alpha * alpha)))


def _check(c, alpha):
    if not c > 0:
        raise DomainError(f"amplitude c must be positive, got {c!r}")
    if not (0 < alpha <= 1):
        raise DomainError(f"alpha must lie in (0, 1], got {alpha!r}")


def curvature(s, c: float, alpha: float):
    return c * np.exp(-alpha * np.asarray(s) ** 2 / 4.0)


def torsion(s, alpha: float):
    return 0.5 * _beta(alpha) * np.asarray(s)


def tail_integral(s, c: float, alpha: float):
    """``int_s^inf kappa = c sqrt(pi/alpha) erfc(s sqrt(alpha) / 2)``."""
    return c * np.sqrt(np.pi / alpha) * special.erfc(np.asarray(s) * np.sqrt(alpha) / 2.0)


def truncation_length(c: float, alpha: float, tol: float) -> float:
    """Smallest ``s`` with tail integral below ``tol`` (at least 1)."""
    scale = c * np.sqrt(np.pi / alpha)
    if scale <= tol:
        return 1.0
    s = 2.0 / np.sqrt(alpha) * special.erfcinv(tol / scale)
    return float(max(1.0, s * (1 + 1e-12)))


@dataclass(frozen=True)
class Profile:
    """Sampled self-similar profile.

    ``s`` runs over ``[-s_max, s_max]`` (integrator nodes, strictly
    increasing); ``f``, ``n``, ``b`` are the frame and ``df``, ``d2f``,
    ``d3f`` the first three derivatives of ``f`` at the nodes.
    ``a_minus`` is the mirror image of ``a_plus``; ``f_minus_end`` is what
    the integration actually reached at ``-s_max``.
    """

    c: float
    alpha: float
    tol: float
    s: np.ndarray
    f: np.ndarray
    n: np.ndarray
    b: np.ndarray
    df: np.ndarray
    d2f: np.ndarray
    d3f: np.ndarray
    a_plus: np.ndarray
    a_minus: np.ndarray
    f_minus_end: np.ndarray
    tail_bound: float
    s_max: float
    reorthonormalizations: int = 0

    @property
    def beta(self) -> float:
        return _beta(self.alpha)

    @property
    def origin_index(self) -> int:
        return int(np.argmin(np.abs(self.s)))


@dataclass(frozen=True)
class AngleResult:
    theta: float
    c: float
    alpha: float


# --------------------------------------------------------------------------
# integration


def _frame_rhs(c, alpha):
    beta = _beta(alpha)

    def rhs(s, y):
        k = c * np.exp(-alpha * s * s / 4.0)
        tau = 0.5 * beta * s
        f, n, b = y[0:3], y[3:6], y[6:9]
        return np.concatenate([k * n, -k * f + tau * b, -tau * n])

    return rhs


def _gram_schmidt(y):
    f = y[0:3] / np.linalg.norm(y[0:3])
    n = y[3:6] - (y[3:6] @ f) * f
    n /= np.linalg.norm(n)
    b = np.cross(f, n)
    if b @ y[6:9] < 0:
        b = -b
    return np.concatenate([f, n, b])


def _frame_drift(y):
    F = y.reshape(3, 3)
    return float(np.max(np.abs(F @ F.T - np.eye(3))))


def _integrate_half(c, alpha, tol, s_end):
    """Integrate from 0 to ``s_end`` (either sign); returns nodes and states."""
    rhs = _frame_rhs(c, alpha)
    y = np.eye(3).ravel()
    s0 = 0.0
    nodes, states = [0.0], [y.copy()]
    fixes = 0
    gap = MAX_NODE_GAP
    while True:
        solver = integrate.RK45(rhs, s0, y, s_end, rtol=tol, atol=tol, max_step=gap)
        restarted = False
        while solver.status == "running":
            msg = solver.step()
            if solver.status == "failed":
                raise IntegrationError(f"frame integration failed at s = {solver.t:.6g}: {msg}")
            nodes.append(solver.t)
            states.append(solver.y.copy())
            if _frame_drift(solver.y) > tol:
                # restart from the re-orthonormalized frame
                fixed = _gram_schmidt(solver.y)
                states[-1] = fixed
                s0, y = solver.t, fixed
                fixes += 1
                restarted = solver.t != s_end
                break
        if not restarted:
            break
    return np.array(nodes), np.array(states), fixes


def _derivatives(s, states, c, alpha):
    beta = _beta(alpha)
    f, n, b = states[:, 0:3], states[:, 3:6], states[:, 6:9]
    s_ = s[:, None]
    k = c * np.exp(-alpha * s_**2 / 4.0)
    k1 = -0.5 * alpha * s_ * k
    k2 = (-0.5 * alpha + 0.25 * alpha**2 * s_**2) * k
    tau = 0.5 * beta * s_
    tau1 = 0.5 * beta
    dn = -k * f + tau * b
    d2n = -k1 * f - k**2 * n + tau1 * b - tau**2 * n
    df = k * n
    d2f = k1 * n + k * dn
    d3f = k2 * n + 2 * k1 * dn + k * d2n
    return df, d2f, d3f


def build_profile(c: float, alpha: float, tol: float = 1e-10) -> Profile:
    """Integrate the Frenet system on ``[-s_max, s_max]``.

    Parameters
    ----------
    c : float
        Similarity amplitude, ``> 0``.
    alpha : float
        Damping in ``(0, 1]``.
    tol : float
        Local absolute and relative tolerance of the Dormand--Prince 5(4)
        stepper, in ``(1e-14, 1e-4)``.  ``s_max`` is chosen so that the tail
        of the curvature integral is below ``tol``.

    Raises
    ------
    IntegrationError
        If ``s_max`` would exceed ``100 / sqrt(alpha)`` or a step fails.
    """
    _check(c, alpha)
    if not (1e-14 < tol < 1e-4):
        raise DomainError(f"tol must lie in (1e-14, 1e-4), got {tol!r}")
    s_max = truncation_length(c, alpha, tol)
    if s_max > 100.0 / np.sqrt(alpha):
        raise IntegrationError(
            f"tail bound {tol:g} needs s_max = {s_max:.4g} > 100/sqrt(alpha)")
    sp, yp, fix_p = _integrate_half(c, alpha, tol, s_max)
    sm, ym, fix_m = _integrate_half(c, alpha, tol, -s_max)
    s = np.concatenate([sm[:0:-1], sp])
    states = np.concatenate([ym[:0:-1], yp])
    df, d2f, d3f = _derivatives(s, states, c, alpha)
    a_plus = yp[-1, 0:3] / np.linalg.norm(yp[-1, 0:3])
    a_minus = a_plus * np.array([1.0, -1.0, -1.0])
    arrays = [s, states[:, 0:3], states[:, 3:6], states[:, 6:9], df, d2f, d3f]
    for a in arrays:
        a.setflags(write=False)
    return Profile(
        c=float(c), alpha=float(alpha), tol=float(tol), s=s,
        f=arrays[1], n=arrays[2], b=arrays[3], df=df, d2f=d2f, d3f=d3f,
        a_plus=a_plus, a_minus=a_minus, f_minus_end=ym[-1, 0:3].copy(),
        tail_bound=float(tail_integral(s_max, c, alpha)), s_max=s_max,
        reorthonormalizations=fix_p + fix_m,
    )


def limit_vectors(p: Profile):
    return p.a_plus.copy(), p.a_minus.copy()


# --------------------------------------------------------------------------
# interpolation


def _quintic_hermite(s, nodes, v, dv, d2v):
    """Piecewise quintic Hermite interpolant from values and two derivatives."""
    j = np.clip(np.searchsorted(nodes, s, side="right") - 1, 0, nodes.size - 2)
    h = (nodes[j + 1] - nodes[j])[:, None]
    t = ((s - nodes[j]) / h[:, 0])[:, None]
    t2, t3 = t * t, t * t * t
    t4, t5 = t3 * t, t3 * t2
    H0 = 1 - 10 * t3 + 15 * t4 - 6 * t5
    H1 = t - 6 * t3 + 8 * t4 - 3 * t5
    H2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5
    H3 = 10 * t3 - 15 * t4 + 6 * t5
    H4 = -4 * t3 + 7 * t4 - 3 * t5
    H5 = 0.5 * t3 - t4 + 0.5 * t5
    return (H0 * v[j] + h * H1 * dv[j] + h * h * H2 * d2v[j]
            + H3 * v[j + 1] + h * H4 * dv[j + 1] + h * h * H5 * d2v[j + 1])


def profile_at(p: Profile, y, derivative: int = 0) -> np.ndarray:
    """``f(y)`` (renormalized) or ``f'(y)`` at arbitrary points; limits beyond ``s_max``."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    out = np.empty(y.shape + (3,))
    inside = np.abs(y) <= p.s_max
    right = y > p.s_max
    left = y < -p.s_max
    if derivative == 0:
        if np.any(inside):
            v = _quintic_hermite(y[inside], p.s, p.f, p.df, p.d2f)
            out[inside] = v / np.linalg.norm(v, axis=1, keepdims=True)
        out[right] = p.a_plus
        out[left] = p.a_minus
    elif derivative == 1:
        if np.any(inside):
            out[inside] = _quintic_hermite(y[inside], p.s, p.df, p.d2f, p.d3f)
        out[~inside] = 0.0
    else:
        raise InputError("only derivative orders 0 and 1 are available")
    return out


def evaluate_m(p: Profile, x, t: float) -> np.ndarray:
    """``m(x, t) = f(x / sqrt(t))``; shape ``(3,)`` for scalar ``x``, else ``(len(x), 3)``."""
    if not t > 0:
        raise DomainError(f"evaluate_m needs t > 0, got {t!r}")
    scalar = np.ndim(x) == 0
    out = profile_at(p, np.asarray(x, dtype=float) / np.sqrt(t))
    return out[0] if scalar else out


def evaluate_dm(p: Profile, x, t: float) -> np.ndarray:
    """``d/dx m(x, t) = f'(x / sqrt(t)) / sqrt(t)``."""
    if not t > 0:
        raise DomainError(f"evaluate_dm needs t > 0, got {t!r}")
    scalar = np.ndim(x) == 0
    out = profile_at(p, np.asarray(x, dtype=float) / np.sqrt(t), derivative=1) / np.sqrt(t)
    return out[0] if scalar else out


def spin_snapshot(p: Profile, grid: Grid, t: float) -> SpinField:
    return SpinField.normalized(evaluate_m(p, grid.x, t), grid)


# --------------------------------------------------------------------------
# angles and closed forms


def explicit_profile(c: float, s):
    """Closed-form profile for ``alpha = 1``: a planar rotation by ``c Erf(s)``."""
    phase = c * SQRT_PI * special.erf(np.asarray(s) / 2.0)
    z = np.zeros_like(phase)
    return np.stack([np.cos(phase), np.sin(phase), z], axis=-1)


def explicit_limits(c: float):
    a = np.array([np.cos(c * SQRT_PI), np.sin(c * SQRT_PI), 0.0])
    return a, a * np.array([1.0, -1.0, -1.0])


def explicit_angle(c: float) -> float:
    return float(np.arccos(np.clip(np.cos(2.0 * c * SQRT_PI), -1.0, 1.0)))


def angle_between_limits(a_plus) -> float:
    """Angle between ``A+`` and its mirror image, i.e. ``arccos(2 A1^2 - 1)``.

    Evaluated through half-angles so that it stays accurate near 0 and pi.
    """
    a = np.asarray(a_plus, dtype=float)
    half = np.arctan2(np.hypot(a[1], a[2]), a[0])
    full = 2.0 * half
    return float(full if full <= np.pi else 2.0 * np.pi - full)


def angle(c: float, alpha: float, tol: float = 1e-12) -> AngleResult:
    if c == 0:
        return AngleResult(0.0, 0.0, float(alpha))
    p = build_profile(c, alpha, tol)
    return AngleResult(angle_between_limits(p.a_plus), float(c), float(alpha))


def theta_lower_bound(c: float, alpha: float) -> float:
    """Small-amplitude lower bound on the angle, valid for ``0 < c < alpha^2 sqrt(pi) / 32``."""
    if not (0 < c < alpha**2 * SQRT_PI / 32):
        raise DomainError("lower bound only holds for 0 < c < alpha^2 sqrt(pi) / 32")
    arg = 1.0 - c * c * np.pi + 32.0 * c**3 * SQRT_PI / alpha**2
    return float(np.arccos(np.clip(arg, -1.0, 1.0)))


def transverse_bound(c: float, alpha: float) -> float:
    """Bound ``c sqrt(pi / alpha)`` on the second and third components of ``A+``."""
    return float(c * np.sqrt(np.pi / alpha))


def dirichlet_energy(p: Profile | None, t: float, points_per_unit: int = 200) -> float:
    """``int |d_x m(x, t)|^2 dx`` by quadrature of the interpolated derivative.

    ``None`` stands for the constant (``c = 0``) profile.
    """
    if not t > 0:
        raise DomainError(f"energy needs t > 0, got {t!r}")
    if p is None:
        return 0.0
    y = np.linspace(-p.s_max, p.s_max, int(2 * p.s_max * points_per_unit) | 1)
    d = profile_at(p, y, derivative=1)
    # x = sqrt(t) y, d_x m = f'(y)/sqrt(t)
    return float(integrate.simpson(np.sum(d * d, axis=1), x=y) / np.sqrt(t))


def dirichlet_energy_exact(c: float, alpha: float, t: float) -> float:
    return float(c * c * np.sqrt(2 * np.pi / (alpha * t)))


def step_data(a_plus, a_minus, grid: Grid) -> SpinField:
    """``A+`` on ``x > 0`` and ``A-`` on ``x < 0``; the node nearest 0 takes ``A+``."""
    a_plus = np.asarray(a_plus, dtype=float)
    a_minus = np.asarray(a_minus, dtype=float)
    for v in (a_plus, a_minus):
        if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
            raise InputError("limit vectors must be unit 3-vectors")
    x = grid.x
    vals = np.where((x > 0)[:, None], a_plus, a_minus)
    vals[int(np.argmin(np.abs(x)))] = a_plus
    return SpinField(vals, grid)


# --------------------------------------------------------------------------
# inverse problems


def find_c_for_angle(theta: float, alpha: float, bracket, tol: float = 1e-10,
                     profile_tol: float = 1e-12) -> float:
    """Amplitude ``c`` in ``bracket`` whose limit angle equals ``theta``.

    Raises
    ------
    BracketError
        If ``theta`` does not lie strictly between the angles at the ends.
    """
    lo, hi = map(float, bracket)
    g_lo = angle(lo, alpha, profile_tol).theta - theta
    g_hi = angle(hi, alpha, profile_tol).theta - theta
    if g_lo * g_hi >= 0:
        raise BracketError(
            f"angle - theta has the same sign at c = {lo:.6g} ({g_lo:+.3e}) and c = {hi:.6g} ({g_hi:+.3e})")
    c = optimize.brentq(lambda cc: angle(cc, alpha, profile_tol).theta - theta, lo, hi,
                        xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    miss = abs(angle(c, alpha, profile_tol).theta - theta)
    if miss >= tol:
        raise IntegrationError(f"root refinement stalled: |theta(c) - theta| = {miss:.3e}")
    return float(c)


@dataclass
class MultiplicityResult:
    theta: float
    alpha: float
    requested: int
    cs: list
    thetas: list
    diagnostics: list

    @property
    def complete(self) -> bool:
        return len(self.cs) >= self.requested


def multiplicity_cs(theta: float, alpha: float, k: int, tol: float = 1e-10,
                    profile_tol: float = 1e-12) -> MultiplicityResult:
    """The first ``k`` amplitudes with limit angle ``theta``.

    Brackets are the half-periods ``[m sqrt(pi)/2, (m+1) sqrt(pi)/2]`` of the
    ``alpha = 1`` angle map; on each one the change of sign of
    ``angle - theta`` is checked before root finding.  The scan stops at the
    first half-period where that check fails, and the result records why.
    """
    if not (0 < theta < np.pi):
        raise DomainError("theta must lie in (0, pi)")
    if k < 0:
        raise DomainError("k must be non-negative")
    cs, thetas, diag = [], [], []
    half = 0.5 * SQRT_PI
    prev = angle(0.0, alpha, profile_tol).theta
    m = 0
    while len(cs) < k:
        lo, hi = m * half, (m + 1) * half
        nxt = angle(hi, alpha, profile_tol).theta
        if (prev - theta) * (nxt - theta) >= 0:
            diag.append({"bracket": [lo, hi], "theta_lo": prev, "theta_hi": nxt,
                         "reason": "no sign change"})
            break
        c = find_c_for_angle(theta, alpha, (lo, hi), tol, profile_tol)
        cs.append(c)
        thetas.append(angle(c, alpha, profile_tol).theta)
        diag.append({"bracket": [lo, hi], "theta_lo": prev, "theta_hi": nxt, "c": c})
        prev = nxt
        m += 1
    return MultiplicityResult(float(theta), float(alpha), int(k), cs, thetas, diag)


def explicit_multiplicity(theta: float, k: int) -> list:
    """Sorted positive roots of ``arccos(cos(2 c sqrt(pi))) = theta``."""
    out = []
    ell = 0
    while len(out) < k:
        for c in (ell * SQRT_PI - theta / (2 * SQRT_PI), ell * SQRT_PI + theta / (2 * SQRT_PI)):
            if c > 0:
                out.append(c)
        ell += 1
    return sorted(out)[:k]


# --------------------------------------------------------------------------
# profile equation


def profile_equation_residual(s, f, alpha: float) -> float:
    """Max over interior nodes of ``|-s f'/2 - beta f x f'' + alpha f x (f x f'')|``.

    ``s`` must be uniformly spaced.
    """
    s = np.asarray(s, dtype=float)
    f = np.asarray(f, dtype=float)
    ds = np.diff(s)
    if s.size < 5 or np.max(np.abs(ds - ds[0])) > 1e-9 * abs(ds[0]):
        raise InputError("need at least 5 uniformly spaced samples")
    d1, d2 = central_d1(f, ds[0], order=4), central_d2(f, ds[0], order=4)
    fi = f[2:-2]
    beta = _beta(alpha)
    fxd2 = np.cross(fi, d2)
    res = -0.5 * s[2:-2, None] * d1 - beta * fxd2 + alpha * np.cross(fi, fxd2)
    return float(np.max(np.linalg.norm(res, axis=1)))


def profile_ode_residual(p: Profile, spacing: float = 0.01) -> float:
    """Residual of the stationary profile equation on a uniform resampling of ``p``."""
    n = int(np.floor(p.s_max / spacing))
    s = spacing * np.arange(-n, n + 1)
    return profile_equation_residual(s, profile_at(p, s), p.alpha)
