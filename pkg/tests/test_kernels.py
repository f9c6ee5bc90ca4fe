"""Theta profiles, Green's kernels and the pointwise coefficient functions."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from zerorange.errors import DomainError
from zerorange.kernels import (
    MassModel,
    ThetaKind,
    ThetaProfile,
    a_function,
    b_apply_point,
    delta_lambda_theta,
    g_lambda,
    green_free_kernel,
    green_mass_kernel,
    phi_weight,
    theta_eval,
)

ADMISSIBLE = [
    ThetaProfile.exponential(1.0),
    ThetaProfile.exponential(0.3),
    ThetaProfile.indicator(2.0),
    ThetaProfile.indicator(0.1),
    ThetaProfile.smooth_bump(1.0),
    ThetaProfile.smooth_bump(0.1),
    ThetaProfile.rising_exponential(1.0),
]


def heat_kernel_green(n, d, lam):
    """(-Laplacian + lam)^-1 kernel in R^n from int_0^inf (4 pi t)^(-n/2) e^(-d^2/4t - lam t) dt."""
    f = lambda t: (4 * math.pi * t) ** (-n / 2) * math.exp(-d * d / (4 * t) - lam * t)
    peak = d * d / (2 * n)
    a, _ = integrate.quad(f, 0, peak, epsabs=0, epsrel=1e-12, limit=200)
    b, _ = integrate.quad(f, peak, np.inf, epsabs=0, epsrel=1e-12, limit=200)
    return a + b


class TestTheta:
    def test_examples(self):
        assert theta_eval(ThetaProfile.indicator(2.0), 1.0) == 1.0
        assert theta_eval(ThetaProfile.exponential(1.0), 1.0) == pytest.approx(0.3678794, abs=1e-7)
        assert theta_eval(ThetaProfile.local_zero(), 0.7) == 0.0

    @pytest.mark.parametrize("profile", ADMISSIBLE, ids=lambda p: f"{p.kind.value}-{p.b}")
    def test_two_sided_bound_on_grid(self, profile):
        b = profile.b
        r = np.linspace(1e-6 * b, 5 * b, 1000)
        th = np.asarray(theta_eval(profile, r))
        slack = 1e-12
        assert np.all(th >= 1 - r / b - slack)
        assert np.all(th <= 1 + r / b + slack)

    @pytest.mark.parametrize("profile", ADMISSIBLE, ids=lambda p: f"{p.kind.value}-{p.b}")
    def test_tends_to_one_at_origin(self, profile):
        assert theta_eval(profile, 1e-12 * profile.b) == pytest.approx(1.0, abs=1e-11)

    def test_smooth_bump_shape(self):
        p = ThetaProfile.smooth_bump(1.0)
        assert p.derivative_at_zero == 0.0
        L = p.support_radius
        r = np.array([L, 1.0001 * L, 3 * L])
        assert np.all(np.asarray(theta_eval(p, r)) == 0.0)
        assert theta_eval(p, 0.999 * L) > 0.0
        # 1 + O(r^2) at the origin
        for r0 in (1e-2, 1e-3):
            assert abs(theta_eval(p, r0) - 1.0) <= 2 * (r0 / L) ** 2
        # C^1: one-sided difference quotients match across the grid
        x = np.linspace(0.01, 1.99, 2000)
        d = np.diff(np.asarray(theta_eval(p, x))) / np.diff(x)
        assert np.max(np.abs(np.diff(d))) < 1e-2

    def test_derivatives(self):
        assert ThetaProfile.exponential(2.0).derivative_at_zero == -0.5
        assert ThetaProfile.rising_exponential(0.5).derivative_at_zero == 2.0
        assert ThetaProfile.indicator(1.0).derivative_at_zero == 0.0
        assert ThetaProfile.local_zero().derivative_at_zero == 0.0

    def test_infinite_range_exponential_is_one(self):
        p = ThetaProfile.exponential(math.inf)
        assert theta_eval(p, 123.0) == 1.0

    def test_rejects(self):
        with pytest.raises(DomainError):
            theta_eval(ThetaProfile.indicator(1.0), 0.0)
        with pytest.raises(DomainError):
            theta_eval(ThetaProfile.indicator(1.0), -1.0)
        with pytest.raises(DomainError):
            ThetaProfile.indicator(0.0)
        with pytest.raises(DomainError):
            ThetaProfile.indicator(math.inf)

    def test_dict_roundtrip(self):
        for p in ADMISSIBLE + [ThetaProfile.local_zero()]:
            assert ThetaProfile.from_dict(p.to_dict()) == p


class TestGLambda:
    def test_examples(self):
        assert g_lambda(1.0, 1.0) == pytest.approx(0.3678794, abs=1e-7)
        assert g_lambda(2.0, 4.0) == pytest.approx(0.0091578, abs=1e-7)
        r = 1e-6
        assert abs(r * g_lambda(r, 1.0) - 1.0) < 1e-5

    def test_rejects_origin(self):
        with pytest.raises(DomainError):
            g_lambda(0.0, 1.0)


class TestDelta:
    def test_examples(self):
        assert delta_lambda_theta(ThetaProfile.exponential(1.0), 1.0, 1.0) == pytest.approx(0.0, abs=1e-15)
        assert delta_lambda_theta(ThetaProfile.indicator(2.0), 1.0, 1.0) == pytest.approx(0.6321206, abs=1e-7)
        assert delta_lambda_theta(ThetaProfile.local_zero(), 1.3, 2.0) == pytest.approx(
            -math.exp(-math.sqrt(2.0) * 1.3) / 1.3, rel=1e-14)

    @pytest.mark.parametrize("lam", [0.25, 1.0, 9.0])
    def test_matching_exponential_vanishes(self, lam):
        p = ThetaProfile.exponential(1.0 / math.sqrt(lam))
        r = np.geomspace(1e-6, 50.0, 300)
        assert np.max(np.abs(delta_lambda_theta(p, r, lam))) < 1e-12

    def test_smooth_bump_small_r_limit(self):
        p = ThetaProfile.smooth_bump(1.0)
        R = np.array([1e-1, 1e-2, 1e-3, 1e-4])
        err = np.abs(np.asarray(delta_lambda_theta(p, R, 1.0)) - 1.0)
        assert np.all(np.diff(err) < 0)
        assert np.all(err <= 1.0 * R)


class TestGreenKernels:
    def test_single_particle_value(self):
        # e^-1 / (4 pi) = 0.029274916
        assert green_free_kernel([0, 0, 0], [1, 0, 0], 1.0) == pytest.approx(math.exp(-1) / (4 * math.pi), rel=1e-13)
        assert green_free_kernel([0, 0, 0], [1, 0, 0], 1.0) == pytest.approx(0.0292749158, abs=1e-10)

    def test_symmetry(self):
        x, y = np.array([0.1, -0.4, 2.0, 1.0, 0.0, 0.3]), np.array([0.5, 0.5, 0.5, -1.0, 0.2, 0.0])
        assert green_free_kernel(x, y, 2.0) == green_free_kernel(y, x, 2.0)

    def test_single_particle_equals_g_over_4pi(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            r = float(rng.uniform(0.01, 20.0))
            lam = float(rng.uniform(0.01, 10.0))
            x = rng.normal(size=3)
            u = rng.normal(size=3)
            y = x + r * u / np.linalg.norm(u)
            assert green_free_kernel(x, y, lam) == pytest.approx(g_lambda(r, lam) / (4 * math.pi), rel=1e-12)

    @pytest.mark.parametrize("n_particles,d,lam", [(2, 1.5, 2.0), (2, 0.3, 0.5), (3, 1.0, 1.0)])
    def test_against_heat_kernel_oracle(self, n_particles, d, lam):
        x = np.zeros(3 * n_particles)
        y = np.zeros(3 * n_particles)
        y[0] = d
        assert green_free_kernel(x, y, lam) == pytest.approx(heat_kernel_green(3 * n_particles, d, lam), rel=1e-6)

    def test_coincident_rejected(self):
        with pytest.raises(DomainError):
            green_free_kernel([1, 2, 3], [1, 2, 3], 1.0)

    def test_mass_kernel_reduces_to_free_kernel(self):
        rng = np.random.default_rng(11)
        model = MassModel(eta=1.0, m_light=0.5)
        for N in (1, 2, 3):
            for _ in range(10):
                x, y = rng.normal(size=3), rng.normal(size=3)
                X, Y = rng.normal(size=3 * N), rng.normal(size=3 * N)
                lam = float(rng.uniform(0.1, 5.0))
                a = green_mass_kernel(x, X, y, Y, model, lam)
                b = green_free_kernel(np.concatenate([x, X]), np.concatenate([y, Y]), lam)
                assert a == pytest.approx(b, rel=1e-12)

    def test_mass_kernel_symmetric_and_decreasing(self):
        model = MassModel(eta=0.3)
        x, X = np.array([0.2, 0.0, 0.1]), np.array([1.0, 0.0, 0.0, 0.0, 1.0, 0.0])
        y, Y = np.array([-0.5, 0.3, 0.0]), np.array([0.0, 0.0, 1.0, 2.0, 0.0, 0.0])
        assert green_mass_kernel(x, X, y, Y, model, 1.5) == green_mass_kernel(y, Y, x, X, model, 1.5)
        vals = [green_mass_kernel([0, 0, 0], [0, 0, 0], [t, 0, 0], [0, t, 0], model, 1.0)
                for t in np.geomspace(0.01, 20.0, 60)]
        assert np.all(np.diff(vals) < 0)

    def test_mass_kernel_rejects_coincident(self):
        with pytest.raises(DomainError):
            green_mass_kernel([0, 0, 0], [1, 1, 1], [0, 0, 0], [1, 1, 1], MassModel(1.0), 1.0)

    def test_mass_model_validation(self):
        with pytest.raises(DomainError):
            MassModel(eta=0.0)
        with pytest.raises(DomainError):
            MassModel(eta=1.0, m_light=-1.0)
        assert MassModel(2.0).m_light == 0.5


class TestAFunction:
    def test_example(self):
        prof = ThetaProfile.indicator(10.0)
        val = a_function([0, 0, 0], [[1, 0, 0], [2, 0, 0]], 1.0, 2.0, prof)
        assert val == pytest.approx(5.0, abs=1e-14)

    def test_far_spectators_restore_alpha(self):
        prof = ThetaProfile.indicator(1.0)
        assert a_function([0, 0, 0], [[5, 0, 0], [0, 7, 0], [0, 0, -9]], -0.7, 3.0, prof) == -0.7

    def test_no_spectators(self):
        assert a_function([0, 0, 0], [], 0.4, 2.0, ThetaProfile.exponential(1.0)) == 0.4

    def test_coincident_rejected(self):
        with pytest.raises(DomainError):
            a_function([0, 0, 0], [[0, 0, 0]], 1.0, 1.0, ThetaProfile.exponential(1.0))
        with pytest.raises(DomainError):
            a_function([0, 0, 0], [[1, 0, 0], [1, 0, 0]], 1.0, 1.0, ThetaProfile.exponential(1.0))

    @settings(max_examples=40, deadline=None)
    @given(a1=st.floats(-5, 5), a2=st.floats(-5, 5), g1=st.floats(0.01, 5), g2=st.floats(0.01, 5),
           c=st.floats(0.1, 3))
    def test_linear_in_alpha_gamma(self, a1, a2, g1, g2, c):
        prof = ThetaProfile.exponential(1.3)
        z, ys = [0.1, 0.2, 0.3], [[1, 0, 0], [0, -1.5, 0.2], [0.3, 0.3, 2.0]]
        lhs = a_function(z, ys, a1 + c * a2, g1 + c * g2, prof)
        rhs = a_function(z, ys, a1, g1, prof) + c * a_function(z, ys, a2, g2, prof)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


class TestBApply:
    def test_example(self):
        prof = ThetaProfile.indicator(2.0)
        val = b_apply_point(0, [1.0, 3.0], [0, 0, 0], [[9, 9, 9], [1, 0, 0]], [0.0, 0.0], 1.0, prof)
        assert val == pytest.approx(3.0, abs=1e-15)

    def test_decoupled_cases(self):
        prof = ThetaProfile.indicator(2.0)
        others = [[0, 0, 0], [1, 0, 0], [0, 5, 0]]
        assert b_apply_point(0, [2.0, 3.0, 4.0], [0, 0, 0.1], others, [0.7, 1, 1], 0.0, prof) == pytest.approx(1.4)
        far = [[0, 0, 0], [50, 0, 0], [0, 50, 0]]
        assert b_apply_point(0, [2.0, 3.0, 4.0], [0, 0, 0.1], far, [0.7, 1, 1], 1.0, prof) == pytest.approx(1.4)

    def test_rejects_coincidence(self):
        with pytest.raises(DomainError):
            b_apply_point(0, [1.0, 1.0], [1, 0, 0], [[0, 0, 0], [1, 0, 0]], [1, 1], 1.0, ThetaProfile.indicator(1))

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-10, 10), min_size=3, max_size=3), st.lists(st.floats(-10, 10), min_size=3,
           max_size=3), st.floats(-3, 3))
    def test_linear_in_values(self, u, v, c):
        prof = ThetaProfile.smooth_bump(1.0)
        others = [[0, 0, 0], [0.5, 0, 0], [0, 0.7, 0.1]]
        args = ([0.1, 0.1, 0.1], others, [0.3, -1.0, 2.0], 1.7, prof)
        w = [a + c * b for a, b in zip(u, v)]
        lhs = b_apply_point(1, w, *args)
        rhs = b_apply_point(1, u, *args) + c * b_apply_point(1, v, *args)
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-10)


class TestPhiWeight:
    def test_examples(self):
        assert phi_weight([[0, 0, 0], [1, 0, 0]], 0.0) == pytest.approx(0.0795775, abs=1e-7)
        assert phi_weight([[0, 0, 0], [1, 0, 0]], 1.0) == pytest.approx(math.exp(-1) / (4 * math.pi), rel=1e-14)

    def test_permutation_invariant(self):
        pts = [[0, 0, 0], [1, 0, 0], [0, 2, 0], [1, 1, 1]]
        assert phi_weight(pts, 0.3) == pytest.approx(phi_weight(pts[::-1], 0.3), rel=1e-15)

    def test_rejects(self):
        with pytest.raises(DomainError):
            phi_weight([[0, 0, 0], [0, 0, 0]], 1.0)
        with pytest.raises(DomainError):
            phi_weight([[0, 0, 0], [1, 0, 0]], -1.0)
