import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from llgbmo import norms, selfsim
from llgbmo.errors import BracketError, DomainError, InputError
from llgbmo.semigroup import Grid

from conftest import cached_profile

SQRT_PI = math.sqrt(math.pi)


def test_closed_form_profile_at_unit_damping():
    p = selfsim.build_profile(0.8, 1.0, 1e-10)
    s = np.linspace(-p.s_max, p.s_max, 1601)
    assert np.max(np.abs(selfsim.profile_at(p, s) - selfsim.explicit_profile(0.8, s))) < 10 * 1e-10


def test_closed_form_uses_gaussian_error_integral():
    # Erf(s) = int_0^s exp(-x^2/4) dx by quadrature
    s = 1.7
    erf_int, _ = integrate.quad(lambda x: math.exp(-x * x / 4), 0, s, epsabs=1e-15)
    f = selfsim.explicit_profile(0.3, s)
    assert f[0] == pytest.approx(math.cos(0.3 * erf_int), abs=1e-14)
    assert f[1] == pytest.approx(math.sin(0.3 * erf_int), abs=1e-14)


def test_initial_frame():
    p = cached_profile(0.4, 0.6)
    i = p.origin_index
    assert p.s[i] == 0.0
    assert np.array_equal(p.f[i], [1.0, 0.0, 0.0])
    assert np.allclose(selfsim.profile_at(p, 0.0)[0], [1, 0, 0], atol=1e-15)


def test_derivative_modulus_point_value():
    p = selfsim.build_profile(0.2, 0.5, 1e-10)
    val = np.linalg.norm(selfsim.profile_at(p, 1.0, derivative=1)[0])
    assert val == pytest.approx(0.2 * math.exp(-1 / 8), rel=1e-8)
    assert val == pytest.approx(0.17650, abs=1e-5)


def test_limits_at_unit_damping():
    p = cached_profile(0.5, 1.0)
    a_plus, a_minus = selfsim.explicit_limits(0.5)
    assert np.allclose(p.a_plus, a_plus, atol=1e-11)
    assert np.allclose(p.a_minus, a_minus, atol=1e-11)
    half = 0.5 * SQRT_PI
    assert np.allclose(a_plus, [math.cos(half), math.sin(half), 0], atol=1e-15)
    assert np.allclose(a_minus, [0.6323395, -0.7746914, 0], atol=1e-7)


def test_small_amplitude_limit_near_first_axis():
    p = selfsim.build_profile(1e-3, 0.7, 1e-10)
    assert np.linalg.norm(p.a_plus - [1, 0, 0]) < 5e-3


def test_transverse_bound():
    p = cached_profile(0.2, 0.5)
    bound = selfsim.transverse_bound(0.2, 0.5)
    assert bound == pytest.approx(0.50133, abs=1e-5)
    assert abs(p.a_plus[1]) <= bound and abs(p.a_plus[2]) <= bound


def test_mirror_symmetry_of_integration():
    p = selfsim.build_profile(0.8, 0.5, 1e-10)
    assert np.linalg.norm(p.f_minus_end - p.a_minus) < 2 * p.tail_bound
    # interior samples satisfy f(-s) = (f1, -f2, -f3)(s)
    s = np.linspace(0.1, 5, 7)
    mirror = selfsim.profile_at(p, s) * [1, -1, -1]
    assert np.max(np.abs(selfsim.profile_at(p, -s) - mirror)) < 1e-9


def test_tail_and_truncation():
    c, alpha, tol = 0.5, 0.7, 1e-10
    s_max = selfsim.truncation_length(c, alpha, tol)
    assert selfsim.tail_integral(s_max, c, alpha) <= tol
    tail, _ = integrate.quad(lambda s: selfsim.curvature(s, c, alpha), 3.0, np.inf, epsabs=1e-15)
    assert selfsim.tail_integral(3.0, c, alpha) == pytest.approx(tail, rel=1e-10)


@settings(max_examples=12, deadline=None)
@given(c=st.floats(0.05, 1.5), alpha=st.floats(0.3, 1.0))
def test_frame_properties(c, alpha):
    p = selfsim.build_profile(c, alpha, 1e-10)
    frames = np.stack([p.f, p.n, p.b], axis=1)
    gram = np.einsum("kij,klj->kil", frames, frames)
    assert np.max(np.abs(gram - np.eye(3))) < 1e-9
    assert np.max(np.abs(np.linalg.norm(p.df, axis=1) - selfsim.curvature(p.s, c, alpha) * np.linalg.norm(p.n, axis=1))) < 1e-14
    bound = selfsim.transverse_bound(c, alpha)
    assert abs(p.a_plus[1]) <= bound + 1e-12 and abs(p.a_plus[2]) <= bound + 1e-12
    assert np.linalg.norm(p.f_minus_end - p.a_minus) < 2 * p.tail_bound + 1e-12


def test_domain_errors():
    with pytest.raises(DomainError):
        selfsim.build_profile(0.0, 0.5)
    with pytest.raises(DomainError):
        selfsim.build_profile(0.3, 1.5)
    with pytest.raises(DomainError):
        selfsim.build_profile(0.3, 0.5, tol=1e-3)
    with pytest.raises(InputError):
        selfsim.profile_at(cached_profile(0.3, 0.5), 0.0, derivative=2)
    with pytest.raises(DomainError):
        selfsim.evaluate_m(cached_profile(0.3, 0.5), 0.0, 0.0)


# --------------------------------------------------------------------------
# angles


def test_angle_closed_form_values():
    assert selfsim.angle(0.5, 1.0).theta == pytest.approx(SQRT_PI, abs=1e-9)
    assert selfsim.explicit_angle(SQRT_PI / 2) == pytest.approx(math.pi, abs=1e-12)
    assert selfsim.angle(SQRT_PI / 2, 1.0).theta == pytest.approx(math.pi, abs=1e-6)
    assert selfsim.angle(0.0, 0.4).theta == 0.0


def test_angle_lower_bound_value():
    lb = selfsim.theta_lower_bound(0.01, 1.0)
    assert lb == pytest.approx(math.acos(1 - 1e-4 * math.pi + 32e-6 * SQRT_PI), rel=1e-12)
    assert lb == pytest.approx(0.02269, abs=1e-5)
    assert selfsim.angle(0.01, 1.0).theta >= lb
    with pytest.raises(DomainError):
        selfsim.theta_lower_bound(0.2, 1.0)


def test_angle_between_limits_is_stable():
    for th in (1e-9, 0.3, math.pi - 1e-9):
        a = np.array([math.cos(th / 2), math.sin(th / 2), 0.0])
        assert selfsim.angle_between_limits(a) == pytest.approx(th, rel=1e-9)


def test_find_amplitude_for_angle():
    c = selfsim.find_c_for_angle(math.pi / 2, 1.0, (1e-6, SQRT_PI / 2))
    assert c == pytest.approx(SQRT_PI / 4, abs=1e-10)
    c = selfsim.find_c_for_angle(SQRT_PI, 1.0, (1e-6, SQRT_PI / 2))
    assert c == pytest.approx(0.5, abs=1e-10)
    c = selfsim.find_c_for_angle(1.0, 0.7, (0.05, 0.7))
    assert selfsim.angle(c, 0.7).theta == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(BracketError):
        selfsim.find_c_for_angle(math.pi / 2, 1.0, (0.5, 0.8))


def test_multiplicity_unit_damping():
    res = selfsim.multiplicity_cs(math.pi / 2, 1.0, 3)
    assert res.complete
    assert np.allclose(res.cs, [0.44311, 1.32934, 2.21557], atol=1e-5)
    assert np.allclose(res.cs, selfsim.explicit_multiplicity(math.pi / 2, 3), atol=1e-10)


def test_multiplicity_small_angle_clusters():
    theta = 0.01
    res = selfsim.multiplicity_cs(theta, 1.0, 4)
    assert np.allclose(res.cs, selfsim.explicit_multiplicity(theta, 4), atol=1e-9)
    ells = np.round(np.array(res.cs) / SQRT_PI)
    assert np.max(np.abs(np.array(res.cs) - ells * SQRT_PI)) <= theta / (2 * SQRT_PI) + 1e-9


def test_multiplicity_zero_requested():
    res = selfsim.multiplicity_cs(1.0, 0.8, 0)
    assert res.cs == [] and res.complete


def test_multiplicity_roots_have_scale_invariant_gradient():
    res = selfsim.multiplicity_cs(math.pi / 2, 1.0, 2)
    for c in res.cs:
        p = cached_profile(c, 1.0)
        for t in (0.01, 1.0, 50.0):
            x = np.linspace(-3, 3, 601) * math.sqrt(t)
            sup = np.max(np.linalg.norm(selfsim.evaluate_dm(p, x, t), axis=1)) * math.sqrt(t)
            assert sup == pytest.approx(c, rel=1e-9)


# --------------------------------------------------------------------------
# evaluation, energy, step data


def test_evaluation_values():
    p = cached_profile(0.3, 1.0)
    assert np.allclose(selfsim.evaluate_m(p, 0.0, 2.0), [1, 0, 0], atol=1e-15)
    grad = np.linalg.norm(selfsim.evaluate_dm(p, 1.0, 4.0))
    assert grad == pytest.approx(0.15 * math.exp(-1 / 16), rel=1e-9)
    assert grad == pytest.approx(0.14091, abs=1e-5)


def test_self_similarity():
    p = cached_profile(0.6, 0.7)
    x = np.linspace(-4, 4, 33)
    assert np.max(np.abs(selfsim.evaluate_m(p, 3 * x, 9 * 0.5) - selfsim.evaluate_m(p, x, 0.5))) < 1e-14


def test_unit_norm_between_nodes():
    p = cached_profile(0.9, 0.4)
    y = np.linspace(-p.s_max, p.s_max, 5003)
    assert np.max(np.abs(np.linalg.norm(selfsim.profile_at(p, y), axis=1) - 1)) < 1e-15


def test_energy_identity():
    p = selfsim.build_profile(0.1, 0.5, 1e-10)
    assert selfsim.dirichlet_energy_exact(0.1, 0.5, 1.0) == pytest.approx(0.01 * math.sqrt(4 * math.pi), rel=1e-14)
    assert selfsim.dirichlet_energy(p, 1.0) == pytest.approx(0.035449077, rel=1e-6)
    scaled = [selfsim.dirichlet_energy(p, t) * math.sqrt(t) for t in (0.25, 1.0, 4.0)]
    assert max(scaled) - min(scaled) < 1e-12
    assert selfsim.dirichlet_energy(None, 1.0) == 0.0


def test_step_data():
    g = Grid.symmetric(5, 64)
    q = np.array([0.6, 0.0, 0.8])
    assert np.array_equal(selfsim.step_data(q, q, g).values, np.tile(q, (g.n, 1)))
    a_plus, a_minus = limits = selfsim.limit_vectors(cached_profile(0.4, 0.8))
    m = selfsim.step_data(*limits, g)
    val = norms.bmo_seminorm(m, [0.5, 1.0, 2.0])
    assert val == pytest.approx(0.5 * np.linalg.norm(a_plus - a_minus), abs=1e-14)
    assert val <= 2 * 0.4 * math.sqrt(2 * math.pi) / math.sqrt(0.8)
    with pytest.raises(InputError):
        selfsim.step_data([1.0, 1.0, 0], q, g)


# --------------------------------------------------------------------------
# profile equation


def _uniform(s_max, spacing=0.01):
    n = int(s_max / spacing)
    return spacing * np.arange(-n, n + 1)


def test_profile_equation_on_closed_form():
    s = _uniform(12.0)
    assert selfsim.profile_equation_residual(s, selfsim.explicit_profile(0.5, s), 1.0) < 1e-6


def test_profile_equation_detects_perturbation():
    s = _uniform(12.0)
    f = selfsim.explicit_profile(0.5, s)
    f[:, 2] += 0.01 * np.exp(-s ** 2)
    assert selfsim.profile_equation_residual(s, f, 1.0) > 1e-3


def test_profile_equation_constant_and_built_profiles():
    s = _uniform(5.0)
    const = np.tile([0.0, 0.6, 0.8], (s.size, 1))
    assert selfsim.profile_equation_residual(s, const, 0.4) < 1e-10
    assert selfsim.profile_ode_residual(selfsim.build_profile(0.5, 0.7, 1e-11)) < 1e-6
    with pytest.raises(InputError):
        selfsim.profile_equation_residual(s ** 3, const, 0.4)


def test_closed_form_phase_is_scaled_error_function():
    # int_0^s exp(-x^2/4) dx = sqrt(pi) erf(s/2)
    s = _uniform(8.0)
    phase = 0.7 * SQRT_PI * special.erf(s / 2)
    assert np.allclose(selfsim.explicit_profile(0.7, s)[:, 1], np.sin(phase), atol=1e-15)


def test_angle_is_continuous_in_amplitude():
    base = selfsim.angle(0.7, 0.8).theta
    steps = [abs(selfsim.angle(0.7 + h, 0.8).theta - base) for h in (1e-2, 5e-3, 2.5e-3, 1.25e-3)]
    assert all(b < a for a, b in zip(steps, steps[1:]))
    assert steps[-1] < 0.6 * steps[-2]


def test_limit_vector_approaches_unit_damping_limit():
    ref = cached_profile(0.5, 1.0).a_plus
    gaps = [np.linalg.norm(cached_profile(0.5, a).a_plus - ref) for a in (0.9, 0.99, 0.999)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.05
