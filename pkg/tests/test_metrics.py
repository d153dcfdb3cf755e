import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alm_means import metrics
from alm_means.errors import DomainError


def spd(rng, dim):
    g = rng.standard_normal((dim, dim))
    return g @ g.T + 0.1 * np.eye(dim)


def test_scalar_distance():
    assert metrics.thompson(2.0, 8.0) == pytest.approx(math.log(4))


def test_diagonal_distance_is_largest_log_ratio():
    a, b = np.diag([1.0, 1.0]), np.diag([2.0, 0.25])
    assert metrics.thompson(a, b) == pytest.approx(math.log(4))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 5), st.floats(0.01, 100))
def test_invariances(seed, dim, t):
    rng = np.random.default_rng(seed)
    a, b = spd(rng, dim), spd(rng, dim)
    s = rng.standard_normal((dim, dim)) + 3 * np.eye(dim)
    d = metrics.thompson(a, b)
    assert metrics.thompson(b, a) == pytest.approx(d, abs=1e-9)
    assert metrics.thompson(s @ a @ s.T, s @ b @ s.T) == pytest.approx(d, abs=1e-7)
    assert metrics.thompson(t * a, t * b) == pytest.approx(d, abs=1e-8)
    assert metrics.thompson(np.linalg.inv(a), np.linalg.inv(b)) == pytest.approx(d, abs=1e-7)
    assert math.exp(d) == pytest.approx(metrics.gauge_R(a, b), rel=1e-9)


def test_triangle_inequality():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b, c = (spd(rng, 3) for _ in range(3))
        assert metrics.thompson(a, c) <= metrics.thompson(a, b) + metrics.thompson(b, c) + 1e-10


def test_requires_definite_arguments():
    with pytest.raises(DomainError):
        metrics.thompson(np.diag([1.0, 0.0]), np.eye(2))
    with pytest.raises(DomainError):
        metrics.max_pairwise_thompson([np.eye(2), np.diag([1.0, 0.0])])


def test_max_pairwise_matches_pairwise_loop():
    rng = np.random.default_rng(1)
    mats = [spd(rng, 4) for _ in range(4)]
    want = max(metrics.thompson(a, b) for i, a in enumerate(mats) for b in mats[i + 1:])
    assert metrics.max_pairwise_thompson(mats) == pytest.approx(want, rel=1e-10)


def test_spectral_radius_helpers():
    assert metrics.spectral_radius(np.array([[0.0, 2.0], [-2.0, 0.0]])) == pytest.approx(2.0)
    assert metrics.relative_spectral_radius(np.eye(2), np.diag([3.0, 1.0])) == pytest.approx(3.0)


def test_geodesic_gauge_bound():
    rng = np.random.default_rng(2)
    for _ in range(20):
        x, y = spd(rng, 3), spd(rng, 3)
        r, s = rng.uniform(0, 1, 2)
        assert metrics.geodesic_gauge_bound_check(x, y, r, s)
