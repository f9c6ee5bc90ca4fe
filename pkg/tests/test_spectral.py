"""Bound states, eigencurves, lower bound and scattering length."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq
from scipy.spatial.transform import Rotation

from zerorange.errors import MaxExpansionExceeded
from zerorange.kernels import ThetaProfile
from zerorange.pointop import CenterConfig, boundary_matrix
from zerorange.spectral import bound_states, eigencurve, eigencurves, lower_bound, scattering_length

PROFILES = [ThetaProfile.exponential(0.8), ThetaProfile.indicator(1.5), ThetaProfile.smooth_bump(1.0),
            ThetaProfile.local_zero()]


def random_config(rng, n=None):
    n = int(rng.integers(1, 7)) if n is None else n
    return CenterConfig(rng.uniform(-2, 2, (n, 3)), rng.uniform(-2, 2, n), PROFILES[int(rng.integers(4))])


def test_single_center():
    res = bound_states(CenterConfig([[0, 0, 0]], [-2.0]))
    assert res.count == 1
    assert abs(res.energies[0] + 4.0) <= 1e-10 * 4.0
    assert res.lambda0 == pytest.approx(4.0, rel=1e-10)
    assert np.allclose(np.abs(res.charge_vectors[0]), [1.0])


@pytest.mark.parametrize("alpha", [0.0, 1.0, 5.0])
def test_no_bound_state_for_nonnegative_alpha(alpha):
    cfg = CenterConfig([[0, 0, 0]], [alpha])
    assert bound_states(cfg).count == 0
    assert lower_bound(cfg) == 0.0


def test_two_center_fixed_point_oracle():
    cfg = CenterConfig.two_center(-1.0, -1.0, 1.0, ThetaProfile.indicator(10.0))
    # symmetric: s = 2 - e^-s ; antisymmetric: s = e^-s
    s1 = brentq(lambda s: s - 2 + math.exp(-s), 0.1, 3)
    s2 = brentq(lambda s: s - math.exp(-s), 0.1, 3)
    res = bound_states(cfg)
    assert np.allclose(np.sort(res.energies), [-s1 * s1, -s2 * s2], rtol=1e-10)
    assert s1 == pytest.approx(1.84141, abs=1e-5) and s2 == pytest.approx(0.56714, abs=1e-5)
    assert lower_bound(cfg) == pytest.approx(s1 * s1, rel=1e-10)
    assert lower_bound(cfg) == pytest.approx(3.3908, abs=1e-4)


def test_eigencurve_single_center():
    grid = np.geomspace(1e-3, 1e3, 50)
    assert np.allclose(eigencurve(CenterConfig([[0, 0, 0]], [-1.0]), 0, grid), -1 + np.sqrt(grid), rtol=1e-15)


def test_eigencurves_reject_bad_grid():
    cfg = CenterConfig([[0, 0, 0]], [-1.0])
    with pytest.raises(ValueError):
        eigencurves(cfg, [1.0, 0.5])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_curves_monotone_and_at_most_n_roots(seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng)
    grid = np.geomspace(1e-4, 1e4, 150)
    for match in (True, False):
        E = eigencurves(cfg, grid, match=match)
        tol = 1e-12 * np.maximum(1.0, np.abs(E[1:]))
        assert np.all(np.diff(E, axis=0) >= -tol)
    changes = np.sum(np.diff(np.sign(eigencurves(cfg, grid, match=False)), axis=0) != 0)
    assert changes <= cfg.n
    res = bound_states(cfg)
    assert res.count <= cfg.n
    assert np.all(np.diff(res.energies) >= 0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_null_vectors_and_lower_bound(seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng)
    res = bound_states(cfg)
    for e, v in zip(res.energies, res.charge_vectors):
        M = boundary_matrix(cfg, -e).entries
        assert np.linalg.svd(M, compute_uv=False)[-1] <= 1e-8 * np.linalg.norm(M, 2)
        assert np.linalg.norm(M @ v) <= 1e-7 * np.linalg.norm(M, 2)
        assert np.linalg.norm(v) == pytest.approx(1.0)
    lb = lower_bound(cfg)
    if res.count:
        assert lb == pytest.approx(-res.energies.min(), rel=1e-8)
        assert res.lambda0 >= -res.energies.min()
    else:
        assert lb == 0.0
    # above the threshold M is positive definite
    assert np.linalg.eigvalsh(boundary_matrix(cfg, lb + 1e-6).entries)[0] > 0


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_rigid_motion_invariance(seed):
    rng = np.random.default_rng(seed)
    cfg = random_config(rng)
    rot = Rotation.random(random_state=seed).as_matrix()
    moved = cfg.transformed(rot, rng.normal(size=3) * 5)
    a, b = bound_states(cfg).energies, bound_states(moved).energies
    assert a.shape == b.shape
    assert np.allclose(a, b, rtol=1e-9, atol=1e-12)


def test_degenerate_equilateral_triangle():
    h = math.sqrt(3) / 2
    cfg = CenterConfig([[0, 0, 0], [1, 0, 0], [0.5, h, 0]], [-2.0, -2.0, -2.0], ThetaProfile.indicator(10.0))
    res = bound_states(cfg)
    assert 2 in res.multiplicities
    i = res.multiplicities.index(2)
    # the doubly degenerate pair spans the complement of (1,1,1)
    idx = sum(res.multiplicities[:i])
    basis = np.array(res.charge_vectors[idx:idx + 2])
    assert np.allclose(basis @ basis.T, np.eye(2), atol=1e-8)
    assert np.allclose(basis @ np.ones(3), 0.0, atol=1e-6)


def test_expansion_cap():
    with pytest.raises(MaxExpansionExceeded):
        bound_states(CenterConfig([[0, 0, 0]], [-1e6]), lambda_max=1e-4, max_expansions=3)


@pytest.mark.parametrize("alpha,expected", [(-0.5, 2.0), (2.0, -0.5), (math.inf, -0.0), (-math.inf, 0.0)])
def test_scattering_length(alpha, expected):
    assert scattering_length(alpha) == expected


def test_scattering_length_unitary_limit():
    assert math.isinf(scattering_length(0.0))
    assert scattering_length(-0.0) == math.inf


def test_merged_scattering_lengths_add():
    a1, a2 = -0.7, 1.9
    merged = 1.0 / (1.0 / a1 + 1.0 / a2)
    assert scattering_length(merged) == pytest.approx(scattering_length(a1) + scattering_length(a2), rel=1e-14)
