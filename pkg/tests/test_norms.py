import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from llgbmo import norms, selfsim
from llgbmo.errors import DomainError, InputError
from llgbmo.norms import ParabolicBallSet, Trajectory
from llgbmo.semigroup import Grid

from conftest import cached_profile


def brute_force_bmo(values, h=1.0):
    """Max mean oscillation over every discrete interval, by explicit loops."""
    v = np.asarray(values, float)
    if v.ndim == 1:
        v = v[:, None]
    best = 0.0
    n = v.shape[0]
    for a in range(n):
        for b in range(a + 2, n + 1):
            w = v[a:b]
            best = max(best, float(np.mean(np.linalg.norm(w - w.mean(axis=0), axis=1))))
    return best


def all_radii(n, h):
    return [0.5 * w * h for w in range(2, n + 1)]


# --------------------------------------------------------------------------
# BMO


def test_constant_field_has_zero_oscillation():
    g = Grid.symmetric(4, 32)
    assert norms.bmo_seminorm(np.ones((g.n, 3)) * [0.6, 0.8, 0], [0.5, 1.0], spacing=g.spacing) < 1e-15
    assert norms.bmo_double_average(np.ones(g.n) * 2.0, [0.5, 1.0], spacing=g.spacing) == 0.0


def test_empty_or_bad_windows():
    with pytest.raises(InputError):
        norms.bmo_seminorm(np.zeros(8), [], spacing=1.0)
    with pytest.raises(InputError):
        norms.bmo_seminorm(np.zeros(8), [-1.0], spacing=1.0)


@pytest.mark.parametrize("a,b", [((1, 0, 0), (0, 1, 0)), ((0, 0, 1), (0.6, 0, -0.8)), ((1, 0, 0), (-1, 0, 0))])
def test_step_oscillation_is_half_the_jump(a, b):
    g = Grid.symmetric(3, 24)
    m = selfsim.step_data(a, b, g)
    expected = 0.5 * np.linalg.norm(np.subtract(a, b))
    oracle = brute_force_bmo(m.values)
    assert oracle == pytest.approx(expected, abs=1e-14)
    assert norms.bmo_seminorm(m, all_radii(g.n, g.spacing)) == pytest.approx(oracle, abs=1e-14)
    assert norms.bmo_double_average(m, all_radii(g.n, g.spacing)) == pytest.approx(oracle, abs=1e-14)


def test_step_value_quoted():
    g = Grid.symmetric(10, 256)
    m = selfsim.step_data([1.0, 0, 0], [0, 1.0, 0], g)
    assert norms.bmo_seminorm(m, [0.5, 1, 2, 4]) == pytest.approx(0.7071067811865476, abs=1e-14)


def test_selfsimilar_step_bound():
    g = Grid.symmetric(10, 256)
    a_plus, a_minus = selfsim.explicit_limits(0.1)
    m = selfsim.step_data(a_plus, a_minus, g)
    val = norms.bmo_seminorm(m, [0.1, 1.0, 5.0])
    assert val <= 2 * 0.1 * math.sqrt(2 * math.pi) / 1.0
    assert 2 * 0.1 * math.sqrt(2 * math.pi) == pytest.approx(0.50133, abs=1e-5)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(8, 40))
def test_against_brute_force(seed, n):
    v = np.random.default_rng(seed).normal(size=(n, 2))
    assert norms.bmo_seminorm(v, all_radii(n, 1.0), spacing=1.0) == pytest.approx(brute_force_bmo(v), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), shift=st.integers(0, 10))
def test_shift_law(seed, shift):
    rng = np.random.default_rng(seed)
    core = np.cumsum(rng.normal(size=(30, 3)), axis=0)
    pad = 20
    left, right = np.repeat(core[:1], pad + shift, 0), np.repeat(core[-1:], pad + 10 - shift, 0)
    base = np.vstack([np.repeat(core[:1], pad, 0), core, np.repeat(core[-1:], pad + 10, 0)])
    moved = np.vstack([left, core, right])
    radii = [1.0, 2.5, 7.0]
    assert norms.bmo_seminorm(moved, radii, spacing=1.0) == norms.bmo_seminorm(base, radii, spacing=1.0)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), lam=st.sampled_from([0.5, 2.0, 4.0, 0.125]))
def test_dilation_law(seed, lam):
    v = np.random.default_rng(seed).normal(size=(50, 2))
    radii = np.array([0.05, 0.2, 0.6])
    a = norms.bmo_seminorm(v, radii, spacing=0.02)
    b = norms.bmo_seminorm(v, radii * lam, spacing=0.02 * lam)
    assert a == b


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), scale=st.floats(-10, 10), offset=st.floats(-5, 5))
def test_value_scaling_and_offset(seed, scale, offset):
    v = np.random.default_rng(seed).normal(size=60)
    radii = [2.0, 5.0]
    base = norms.bmo_seminorm(v, radii, spacing=1.0)
    assert norms.bmo_seminorm(scale * v + offset, radii, spacing=1.0) == pytest.approx(
        abs(scale) * base, rel=1e-12, abs=1e-12)
    assert norms.bmo_seminorm(v[::-1], radii, spacing=1.0) == pytest.approx(base, rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1), k=st.integers(1, 3))
def test_bounded_by_twice_sup(seed, k):
    rng = np.random.default_rng(seed)
    v = rng.standard_cauchy(size=(40, k))
    sup = float(np.max(np.linalg.norm(v, axis=1)))
    assert norms.bmo_seminorm(v, [1.0, 3.0, 10.0], spacing=1.0) <= 2 * sup
    assert norms.bmo_double_average(v, [1.0, 3.0, 10.0], spacing=1.0) <= 2 * sup


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2 ** 32 - 1))
def test_sandwich(seed):
    rng = np.random.default_rng(seed)
    g = Grid.symmetric(10, 96)
    f = np.cumsum(rng.normal(size=(g.n, 2)), axis=0) * 0.1
    radii = [0.3, 1.0, 2.5]
    lo = norms.bmo_seminorm(f, radii, spacing=g.spacing)
    mid = norms.bmo_double_average(f, radii, spacing=g.spacing)
    assert lo - 1e-8 <= mid <= 2 * lo + 1e-8


def test_stride_gives_lower_bound():
    v = np.random.default_rng(1).normal(size=200)
    full = norms.bmo_seminorm(v, [5.0, 20.0], spacing=1.0)
    assert norms.bmo_seminorm(v, [5.0, 20.0], spacing=1.0, stride=3) <= full


# --------------------------------------------------------------------------
# X and Y norms


def selfsim_trajectory(c, alpha, grid, times):
    prof = cached_profile(c, alpha)
    vals = np.stack([selfsim.evaluate_m(prof, grid.x, t) for t in times])
    grads = np.stack([selfsim.evaluate_dm(prof, grid.x, t) for t in times])
    return Trajectory(times, vals, grid, grads)


def test_constant_trajectory_has_zero_x_norm():
    g = Grid.symmetric(5, 64)
    vals = np.tile([0.0, 0.0, 1.0], (4, g.n, 1))
    tr = Trajectory(np.array([0.1, 0.2, 0.5, 1.0]), vals, g, np.zeros_like(vals))
    xn = norms.x_seminorm(tr)
    assert xn.sup_part == 0 and xn.carleson_part == 0


def test_selfsimilar_x_norm():
    c, alpha = 0.3, 0.6
    g = Grid.symmetric(20, 2048)
    times = np.geomspace(0.01, 10, 61)
    tr = selfsim_trajectory(c, alpha, g, times)
    balls = ParabolicBallSet(g.x[::16], [0.25, 0.5, 1.0, 2.0, 3.0])
    xn = norms.x_seminorm(tr, balls)
    assert xn.sup_part == pytest.approx(c, rel=1e-8)
    per_time = np.sqrt(times) * tr.gradient_magnitude().max(axis=1)
    assert np.max(np.abs(per_time - c)) < 1e-8
    assert xn.total <= 4 * c / alpha ** 0.25
    assert 4 * c / alpha ** 0.25 == pytest.approx(1.3634632, abs=1e-7)
    # the sampled Carleson part cannot exceed the closed-form supremum
    assert xn.carleson_part ** 2 <= norms.carleson_selfsim_bound(c, alpha)


def test_y_norm_of_gradient_square_is_controlled():
    c, alpha = 0.3, 0.6
    g = Grid.symmetric(20, 1024)
    times = np.geomspace(0.01, 10, 41)
    tr = selfsim_trajectory(c, alpha, g, times)
    balls = ParabolicBallSet(g.x[::8], [0.25, 0.5, 1.0, 2.0])
    dens = Trajectory(times, tr.gradient_magnitude() ** 2, g)
    assert norms.y_norm(dens, balls) <= norms.x_seminorm(tr, balls).total ** 2


def test_y_norm_simple_cases():
    g = Grid.symmetric(5, 64)
    times = np.linspace(0.5, 2.0, 7)
    inv_t = Trajectory(times, np.tile(1 / times[:, None], (1, g.n)), g)
    balls = ParabolicBallSet([0.0], [0.1])  # r^2 below the first time: no Carleson term
    assert norms.y_norm(inv_t, balls) == pytest.approx(1.0, abs=1e-15)
    zero = Trajectory(times, np.zeros((7, g.n)), g)
    assert norms.y_norm(zero) == 0.0


def test_trajectory_validation():
    g = Grid.symmetric(1, 8)
    with pytest.raises(InputError):
        Trajectory(np.array([0.2, 0.1]), np.zeros((2, 8)), g)
    with pytest.raises(InputError):
        Trajectory(np.array([0.0, 0.1]), np.zeros((2, 8)), g)
    with pytest.raises(InputError):
        Trajectory(np.array([0.1]), np.zeros((1, 7)), g)
    with pytest.raises(InputError):
        ParabolicBallSet([0.0], [0.0])
    with pytest.raises(InputError):
        norms.x_seminorm(Trajectory(np.array([0.1]), np.zeros((1, 8)), g))


# --------------------------------------------------------------------------
# exponential integral and Carleson closed form


def test_e1_point_value():
    assert norms.e1(1.0) == pytest.approx(0.21938393439552029, rel=1e-14)


@settings(max_examples=100, deadline=None)
@given(y=st.floats(1e-8, 600.0))
def test_e1_against_scipy(y):
    assert norms.e1(y) == pytest.approx(float(special.exp1(y)), rel=1e-12, abs=1e-300)


def test_e1_asymptotics_and_domain():
    y = 50.0
    assert norms.e1(y) * y * math.exp(y) == pytest.approx(1.0, rel=0.03)
    with pytest.raises(DomainError):
        norms.e1(0.0)
    arr = norms.e1(np.array([0.5, 2.0]))
    assert arr.shape == (2,)


def test_e1_square_integral():
    assert norms.e1_square_integral(0.0, np.inf) == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert norms.e1_square_integral(-1.0, 1.0) == pytest.approx(2 * norms.e1_square_integral(0.0, 1.0), rel=1e-13)
    assert norms.e1_square_integral(1.0, -1.0) == pytest.approx(-norms.e1_square_integral(-1.0, 1.0))


def test_carleson_canonical_case():
    # direct double quadrature of (c^2/r) int_0^{r^2} int_{-r}^{r} exp(-y^2/2t)/t dy dt
    inner = lambda t: math.sqrt(2 * math.pi / t) * special.erf(1 / math.sqrt(2 * t))  # noqa: E731
    oracle, _ = integrate.quad(inner, 0, 1, epsabs=1e-13, limit=200)
    s = 1 / math.sqrt(2)
    closed = math.sqrt(2) * norms.e1_square_integral(-s, s)
    assert norms.carleson_selfsim(1.0, 1.0, 0.0, 1.0) == pytest.approx(closed, rel=1e-13)
    assert closed == pytest.approx(oracle, abs=1e-9)


def test_carleson_bound_and_degenerate():
    bound = norms.carleson_selfsim_bound(1.0, 1.0)
    assert bound == pytest.approx(5.01326, abs=1e-5)
    for x in (-3, 0, 0.4, 2):
        for r in (0.01, 0.5, 1, 100):
            assert norms.carleson_selfsim(1.0, 1.0, x, r) <= bound
    assert norms.carleson_selfsim(0.0, 0.5, 1.0, 1.0) == 0.0
    with pytest.raises(DomainError):
        norms.carleson_selfsim(1.0, 1.0, 0.0, 0.0)
