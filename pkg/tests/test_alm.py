import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from alm_means import alm, linalg, metrics
from alm_means import kubo_ando as ka
from alm_means.errors import (
    DomainError,
    HypothesisViolation,
    InvalidTriple,
    NonConverged,
    NotAffinelyDominated,
    ParameterError,
    PreconditionError,
)

GEO = (ka.geometric(),) * 3
ITER = alm.AlmConfig(force_iterate=True)


def spd(rng, dim):
    g = rng.standard_normal((dim, dim))
    return g @ g.T + 0.5 * np.eye(dim)


def test_scalar_geometric_mean():
    assert alm.alm_mean(GEO, 1.0, 2.0, 4.0)[0, 0] == pytest.approx(2.0, abs=1e-12)


def test_known_weights_for_unequal_geometric_triple():
    out = alm.alm_compute((ka.geometric(0.5), ka.geometric(1 / 3), ka.geometric(0.25)),
                          2.0, 3.0, 5.0)
    assert np.allclose(out.p, np.array([4, 3, 4]) / 11)
    want = 2.0 ** (4 / 11) * 3.0 ** (3 / 11) * 5.0 ** (4 / 11)
    assert out.limit[0, 0] == pytest.approx(want, rel=1e-12)


def test_config_validation():
    for bad in ({"tol": 0.0}, {"max_iter": 0}, {"eps_shift": -1.0}, {"eps_ladder": 1.0},
                {"ladder_length": 0}):
        with pytest.raises(ParameterError):
            alm.AlmConfig(**bad)


def test_triple_validation():
    with pytest.raises(InvalidTriple):
        alm.validate_triple(ka.make_mean("right"), ka.geometric(), ka.geometric())
    with pytest.raises(HypothesisViolation) as info:
        alm.validate_triple(ka.arithmetic(0.3), ka.geometric(), ka.arithmetic(0.6))
    assert list(info.value.indices) == [0, 2]
    t = alm.validate_triple(ka.arithmetic(0.3), ka.geometric(), ka.arithmetic(0.6), unsafe=True)
    assert t.validity == alm.UNSAFE
    assert alm.validate_triple(*(ka.arithmetic(0.5),) * 3).validity == alm.ALL_ARITHMETIC


def test_fast_paths_agree_with_iteration():
    rng = np.random.default_rng(0)
    mats = [spd(rng, 3) for _ in range(3)]
    for kind in ("arithmetic", "harmonic"):
        triple = (ka.make_mean(kind, 0.3), ka.make_mean(kind, 0.6), ka.make_mean(kind, 0.45))
        fast = alm.alm_compute(triple, *mats)
        slow = alm.alm_compute(triple, *mats, ITER)
        assert fast.stop_reason == alm.CLOSED_FORM
        assert slow.stop_reason == alm.CONVERGED
        assert np.allclose(fast.limit, slow.limit, atol=1e-9)


def test_identity_is_fixed_exactly():
    eye = np.eye(4)
    for triple in (GEO, (ka.arithmetic(0.2),) * 3, (ka.harmonic(0.3), ka.geometric(0.6), ka.arithmetic(0.5))):
        assert np.array_equal(alm.alm_mean(triple, eye, eye, eye), eye)
        assert np.array_equal(alm.alm_mean(triple, eye, eye, eye, ITER), eye)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 4))
def test_members_meet_and_aggregate_decreases(seed, dim):
    rng = np.random.default_rng(seed)
    triple = (ka.harmonic(0.4), ka.geometric(0.7), ka.arithmetic(0.5))
    out = alm.alm_compute(triple, *(spd(rng, dim) for _ in range(3)))
    assert out.stop_reason == alm.CONVERGED
    assert out.final_distance <= 1e-12
    assert out.s_monotone_violation >= -1e-9 * out.s0_norm
    assert metrics.max_pairwise_thompson(out.members) <= 1e-12


def test_trace_records():
    rng = np.random.default_rng(3)
    cfg = alm.AlmConfig(trace_every=2)
    out = alm.alm_compute(GEO, *(spd(rng, 2) for _ in range(3)), cfg)
    its = [t.iteration for t in out.trace]
    assert its[:-1] == list(range(0, out.iterations, 2))
    assert its[-1] == out.iterations
    d = out.to_dict(include_trace=True)
    assert len(d["trace"]) == len(out.trace)


def test_non_converged_carries_partial_outcome():
    rng = np.random.default_rng(4)
    with pytest.raises(NonConverged) as info:
        alm.alm_compute(GEO, *(spd(rng, 3) for _ in range(3)), alm.AlmConfig(max_iter=2))
    assert info.value.outcome.iterations == 2
    assert info.value.outcome.stop_reason == alm.MAX_ITER


def test_semidefinite_inputs_use_ladder():
    a = np.diag([1.0, 0.0])
    b = np.diag([0.0, 1.0])
    c = np.eye(2)
    out = alm.alm_compute(GEO, a, b, c)
    assert len(out.ladder) == alm.AlmConfig().ladder_length
    eps = [e for e, _ in out.ladder]
    assert eps == sorted(eps, reverse=True)
    # the limit shrinks toward the singular mean as the shift decreases
    assert np.all(np.diag(out.limit) < 1e-2)


def test_indefinite_and_mismatched_inputs_rejected():
    with pytest.raises(DomainError):
        alm.alm_compute(GEO, np.diag([1.0, -1.0]), np.eye(2), np.eye(2))
    with pytest.raises(DomainError):
        alm.alm_compute(GEO, np.eye(2), np.eye(3), np.eye(2))


def test_n2_reduction_is_exact():
    rng = np.random.default_rng(5)
    mats = [spd(rng, 3) for _ in range(3)]
    triple = (ka.harmonic(0.4), ka.geometric(0.7), ka.geometric(0.2))
    a = alm.alm_compute(triple, *mats, ITER).limit
    b = alm.alm_compute_n([alm.from_two_var(s) for s in triple], mats, ITER).limit
    assert np.array_equal(a, b)


def test_multimean_properties():
    geo = alm.build_alm_multimean(GEO)
    assert geo.permutation_invariant and geo.strictly_concave and geo.arity == 3
    arith = alm.build_alm_multimean((ka.arithmetic(0.5),) * 3)
    assert arith.is_arithmetic and not arith.strictly_concave
    with pytest.raises(ParameterError):
        geo(np.eye(2), np.eye(2))


def test_weight_estimation():
    m = alm.build_alm_multimean((ka.geometric(0.5), ka.geometric(1 / 3), ka.geometric(0.25)))
    assert np.allclose(alm.estimate_weight_vector(m), np.array([4, 3, 4]) / 11, atol=1e-5)


def test_non_dominated_means_rejected():
    zero = alm.arithmetic_multimean([0.0, 0.5, 0.5])
    pos = alm.arithmetic_multimean([0.5, 0.25, 0.25])
    mats = [np.eye(2)] * 4
    with pytest.raises(NotAffinelyDominated):
        alm.alm_compute_n([zero, pos, pos, pos], mats)


def test_arithmetic_n_fast_path():
    means = [alm.arithmetic_multimean([0.5, 0.25, 0.25])] * 4
    mats = [np.array([[float(k + 1)]]) for k in range(4)]
    out = alm.alm_compute_n(means, mats)
    assert out.stop_reason == alm.CLOSED_FORM
    slow = alm.alm_compute_n(means, mats, ITER)
    assert slow.limit[0, 0] == pytest.approx(out.limit[0, 0], abs=1e-10)


def test_ordered_run():
    c = np.eye(2)
    b = c + np.diag([1.0, 0.5])
    a = b + np.diag([0.5, 2.0])
    run = alm.ordered_convergence_run(alm.from_two_var(ka.geometric()), [a, b, c])
    assert run.stop_reason == alm.CONVERGED
    assert run.pattern_violation >= -1e-9 and run.monotone_violation >= -1e-9
    assert run.residuals_first[-1] <= 1e-8
    with pytest.raises(PreconditionError):
        alm.ordered_convergence_run(alm.from_two_var(ka.geometric()), [c, b, a])
    with pytest.raises(PreconditionError):
        alm.ordered_convergence_run(alm.from_two_var(ka.geometric(0.3)), [a, b, c])


def test_adaptive_tolerance_reported():
    rng = np.random.default_rng(6)
    q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    ill = (q * np.array([1e-7, 1.0, 1e3])) @ q.T
    out = alm.alm_compute(GEO, ill, np.eye(3), 2 * np.eye(3), alm.AlmConfig(adaptive_tol=True))
    assert not out.ladder
    assert out.tol_used > 1e-12
    assert out.tol_used == pytest.approx(alm.regularized_tol(alm.AlmConfig(), [ill, np.eye(3), 2 * np.eye(3)]), rel=1e-4)


def test_loewner_sandwich():
    rng = np.random.default_rng(7)
    mats = [spd(rng, 3) for _ in range(3)]
    triple = (ka.geometric(0.3), ka.harmonic(0.6), ka.geometric(0.5))
    out = alm.alm_compute(triple, *mats)
    arith = sum(p * m for p, m in zip(out.p, mats))
    harm = np.linalg.inv(sum(p * np.linalg.inv(m) for p, m in zip(out.p, mats)))
    assert linalg.loewner_leq(harm, out.limit, 1e-9)
    assert linalg.loewner_leq(out.limit, arith, 1e-9)
