import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alm_means import kubo_ando as ka
from alm_means.errors import InconsistentMean, ParameterError, SingularInput, Unsupported

weights = st.floats(0.05, 0.95)
kinds = st.sampled_from(ka.BUILTIN_KINDS)


def test_scalar_examples():
    assert ka.evaluate(ka.geometric(0.5), 4.0, 9.0)[0, 0] == pytest.approx(6.0)
    assert ka.evaluate(ka.harmonic(0.5), 2.0, 6.0)[0, 0] == pytest.approx(3.0)
    assert ka.evaluate(ka.arithmetic(0.25), 4.0, 8.0)[0, 0] == pytest.approx(5.0)


def test_commuting_example():
    out = ka.evaluate(ka.geometric(0.5), np.diag([1.0, 4.0]), np.diag([9.0, 16.0]))
    assert np.allclose(out, np.diag([3.0, 8.0]))


@pytest.mark.parametrize("kind", ka.BUILTIN_KINDS)
def test_identity_is_fixed(kind):
    assert np.allclose(ka.evaluate(ka.make_mean(kind, 0.3), np.eye(3), np.eye(3)), np.eye(3))


def test_trivial_means_from_endpoints():
    assert ka.make_mean("geometric", 0.0).kind == "left"
    assert ka.make_mean("harmonic", 1.0).kind == "right"
    a, b = np.diag([1.0, 2.0]), np.diag([3.0, 4.0])
    assert np.array_equal(ka.evaluate(ka.make_mean("left"), a, b), a)
    assert np.array_equal(ka.evaluate(ka.make_mean("right"), a, b), b)


def test_out_of_range_weight():
    with pytest.raises(ParameterError):
        ka.geometric(1.5)


def test_singular_first_argument_needs_shift():
    sigma = ka.geometric(0.5)
    with pytest.raises(SingularInput):
        ka.evaluate(sigma, np.diag([1.0, 0.0]), np.eye(2))
    out = ka.evaluate(sigma, np.diag([1.0, 0.0]), np.eye(2), eps=1e-8)
    assert out[1, 1] == pytest.approx(1e-4, rel=1e-3)


def test_adjoint_and_transpose_tables():
    assert ka.adjoint(ka.arithmetic(0.3)).kind == "harmonic"
    assert ka.adjoint(ka.harmonic(0.3)).kind == "arithmetic"
    assert ka.adjoint(ka.geometric(0.3)).kind == "geometric"
    assert ka.transpose(ka.geometric(0.3)).weight == pytest.approx(0.7)
    assert ka.transpose(ka.make_mean("left")).kind == "right"
    with pytest.raises(Unsupported):
        ka.adjoint(ka.make_mean("left"))


@settings(max_examples=30, deadline=None)
@given(kinds, weights)
def test_involutions(kind, r):
    sigma = ka.make_mean(kind, r)
    assert ka.functions_agree(sigma.f, ka.adjoint(ka.adjoint(sigma)).f)
    assert ka.functions_agree(sigma.f, ka.transpose(ka.transpose(sigma)).f)


@settings(max_examples=30, deadline=None)
@given(kinds, weights)
def test_weight_is_derivative_at_one(kind, r):
    assert ka.weight_of(ka.make_mean(kind, r)) == pytest.approx(r, abs=1e-6)


def test_custom_mean_checks():
    logmean = ka.custom_mean(lambda t: np.where(np.abs(t - 1) < 1e-12, 1.0,
                                                (t - 1) / np.log(np.where(t == 1, 2.0, t))),
                             weight=0.5, name="logarithmic")
    assert ka.weight_of(logmean) == pytest.approx(0.5, abs=1e-6)
    with pytest.raises(ParameterError):
        ka.custom_mean(lambda t: 2.0 * t, weight=2.0)
    bad = ka.custom_mean(lambda t: np.sqrt(t), weight=0.3)
    with pytest.raises(InconsistentMean):
        ka.weight_of(bad)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["geometric", "harmonic"]), weights,
       st.floats(0.01, 100), st.floats(0.01, 100))
def test_strictly_below_weighted_average(kind, r, a, b):
    sigma = ka.make_mean(kind, r)
    gap = (1 - r) * a + r * b - ka.scalar_mean(sigma, a, b)
    assert gap >= -1e-12 * max(a, b)
    if abs(a - b) > 1e-3 * max(a, b):
        assert gap > 0


def test_scalar_mean_boundary():
    assert ka.scalar_mean(ka.arithmetic(0.25), 0.0, 4.0) == pytest.approx(1.0)
    assert ka.scalar_mean(ka.geometric(0.5), 0.0, 4.0) == 0.0


def test_scalar_transfer_inequality():
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = rng.standard_normal((3, 3))
        a, b = g @ g.T + 0.1 * np.eye(3), np.diag(rng.uniform(0.1, 5, 3))
        x = rng.standard_normal(3)
        assert ka.scalar_mean_inequality_check(ka.harmonic(0.4), a, b, x)


def test_mean_order_on_grid():
    assert ka.mean_leq(ka.harmonic(0.3), ka.geometric(0.3))
    assert ka.mean_leq(ka.geometric(0.3), ka.arithmetic(0.3))
    assert not ka.mean_leq(ka.arithmetic(0.3), ka.harmonic(0.3))


def test_near_singular_pair_is_accurate():
    # both arguments nearly singular along different directions
    eps = 1e-10
    a = np.diag([eps, 1.0])
    c, s = math.cos(0.3), math.sin(0.3)
    rot = np.array([[c, -s], [s, c]])
    b = rot @ np.diag([1.0, eps]) @ rot.T
    out = ka.evaluate(ka.geometric(0.5), a, b)
    # geometric mean of 2x2 matrices: (A + B) sqrt(det) / sqrt(det(A + B + 2 sqrt(det) I)) form
    sd = math.sqrt(np.linalg.det(a) * np.linalg.det(b)) ** 0.5
    want = sd * (a / sd + b / sd) / math.sqrt(np.linalg.det(a / sd + b / sd))
    assert np.allclose(out, want, atol=1e-12)


def test_dict_roundtrip():
    for sigma in (ka.geometric(0.3), ka.harmonic(0.7), ka.arithmetic(0.5), ka.make_mean("left")):
        back = ka.mean_from_dict(ka.mean_to_dict(sigma))
        assert ka.same_mean(sigma, back)
