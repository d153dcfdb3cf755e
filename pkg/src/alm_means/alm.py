"""
ALM-type iterations for multivariate operator means.

Three variables
    ``(A, B, C) -> (B s1 C, C s2 A, A s3 B)`` repeated until the three
    members agree; the limit is the common value, reached from above by the
    aggregate ``S_n = p1 A_n + p2 B_n + p3 C_n`` where ``p`` is the Perron
    vector of the weight matrix of ``(s1, s2, s3)``.

n + 1 variables
    ``A^(k) -> M_k(A^(k+1), ..., A^(k+n))`` (indices mod n+1) for n-variable
    means ``M_0, ..., M_n``.  :func:`build_alm_multimean` turns a valid triple
    into a 3-variable :class:`MultiMean`, so the construction can be stacked.

Convergence is declared when the largest pairwise Thompson distance among
the sequence members drops below ``AlmConfig.tol``; the returned limit is
the aggregate at that step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import kubo_ando as ka
from . import linalg
from .errors import (
    DomainError,
    HypothesisViolation,
    InvalidTriple,
    NonConverged,
    NotAffinelyDominated,
    ParameterError,
    PreconditionError,
    WeightEstimationFailure,
)
from .metrics import max_pairwise_thompson
from .stochastic import StochasticProfile, gamma_from_multimeans, gamma_from_weights_3

log = logging.getLogger(__name__)

CONVERGED = "Converged"
MAX_ITER = "MaxIter"
CLOSED_FORM = "ClosedForm"

ALL_ARITHMETIC = "AllArithmetic"
AT_MOST_ONE_ARITHMETIC = "AtMostOneArithmetic"
UNSAFE = "Unsafe"


@dataclass(frozen=True)
class AlmConfig:
    """Stopping rule and regularization settings.

    Attributes
    ----------
    tol : float
        Stop once the max pairwise Thompson distance is ``<= tol``.
    max_iter : int
    eps_shift : float or None
        Smallest regularization shift for semidefinite inputs.  ``None``
        means ``1e-10`` times the mean of ``trace(A_k) / dim``.
    eps_ladder : float
        Ratio between consecutive shifts of the ladder.
    ladder_length : int
    trace_every : int
        Record a trace entry every this many iterations.
    force_iterate : bool
        Skip the closed-form fast paths.
    adaptive_tol : bool
        Raise ``tol`` to the round-off floor of ill-conditioned definite
        inputs (always done for regularized semidefinite inputs).
    unsafe_allow : bool
        Run even when the convergence hypotheses are violated.
    """

    tol: float = 1e-12
    max_iter: int = 10_000
    eps_shift: float | None = None
    eps_ladder: float = 0.1
    ladder_length: int = 4
    trace_every: int = 1
    force_iterate: bool = False
    adaptive_tol: bool = False
    unsafe_allow: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError("tol must be positive")
        if self.max_iter < 1:
            raise ParameterError("max_iter must be at least 1")
        if self.eps_shift is not None and self.eps_shift < 0:
            raise ParameterError("eps_shift must be nonnegative")
        if not 0.0 < self.eps_ladder < 1.0:
            raise ParameterError("eps_ladder must lie in (0, 1)")
        if self.ladder_length < 1 or self.trace_every < 1:
            raise ParameterError("ladder_length and trace_every must be at least 1")


@dataclass
class TraceRecord:
    iteration: int
    max_distance: float
    witness: list
    step_frobenius: float

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "max_distance": self.max_distance,
            "witness": list(self.witness),
            "step_frobenius": self.step_frobenius,
        }


@dataclass
class AlmOutcome:
    """Result of an ALM run.

    ``s_monotone_violation`` is the most negative eigenvalue seen in
    ``S_n - S_{n+1}`` (0 if none was negative); ``s0_norm`` is the spectral
    norm of the initial aggregate, for scaling that figure.
    """

    limit: np.ndarray
    p: np.ndarray
    iterations: int
    stop_reason: str
    trace: list = field(default_factory=list)
    s_monotone_violation: float = 0.0
    s0_norm: float = 0.0
    final_distance: float = 0.0
    spectral_gap: float = float("nan")
    members: list = field(default_factory=list)
    ladder: list = field(default_factory=list)
    tol_used: float = float("nan")

    def to_dict(self, include_trace: bool = False) -> dict:
        out = {
            "limit": self.limit.tolist(),
            "p": self.p.tolist(),
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "spectral_gap": self.spectral_gap,
            "final_distance": self.final_distance,
            "s_monotone_violation": self.s_monotone_violation,
            "tol_used": self.tol_used,
        }
        if include_trace:
            out["trace"] = [t.to_dict() for t in self.trace]
        if self.ladder:
            out["ladder"] = [{"eps": e, "limit": m.tolist()} for e, m in self.ladder]
        return out


@dataclass(frozen=True)
class MeanTriple:
    sigmas: tuple
    p: np.ndarray
    validity: str
    profile: StochasticProfile

    @property
    def weights(self) -> tuple:
        return tuple(s.weight for s in self.sigmas)


@dataclass(frozen=True, eq=False)
class MultiMean:
    """An n-variable operator mean given by an evaluator.

    ``weights`` is the probability vector the mean is dominated by (equal to
    the partial derivatives at the all-ones point).
    """

    arity: int
    evaluator: Callable[[Sequence[np.ndarray]], np.ndarray]
    weights: np.ndarray
    affinely_dominated: bool = True
    strictly_concave: bool = False
    is_arithmetic: bool = False
    permutation_invariant: bool = False
    is_trivial: bool = False
    name: str = ""

    def __call__(self, *mats):
        if len(mats) != self.arity:
            raise ParameterError(f"{self.name or 'mean'} takes {self.arity} arguments")
        return self.evaluator([linalg.as_square(m) for m in mats])


# -- constructors -----------------------------------------------------------

def arithmetic_multimean(weights, name: str = "") -> MultiMean:
    """``M(X_1, ..., X_n) = sum w_i X_i``."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise ParameterError("arithmetic weights must be a probability vector")

    def ev(xs):
        return sum(wi * x for wi, x in zip(w, xs))

    return MultiMean(
        arity=len(w), evaluator=ev, weights=w,
        affinely_dominated=bool(np.all(w > 0)),
        strictly_concave=False, is_arithmetic=True,
        permutation_invariant=bool(np.all(w == w[0])),
        is_trivial=bool(np.any(w == 1.0)),
        name=name or "arith" + str(np.round(w, 4).tolist()),
    )


def from_two_var(sigma: ka.TwoVarMean) -> MultiMean:
    """View a two-variable mean as a 2-ary :class:`MultiMean`."""
    def ev(xs):
        return ka.evaluate(sigma, xs[0], xs[1])

    trivial = sigma.is_trivial
    return MultiMean(
        arity=2, evaluator=ev, weights=np.array([1.0 - sigma.weight, sigma.weight]),
        affinely_dominated=not trivial,
        strictly_concave=not (trivial or sigma.is_arithmetic),
        is_arithmetic=sigma.is_arithmetic,
        permutation_invariant=sigma.is_symmetric,
        is_trivial=trivial, name=str(sigma),
    )


def validate_triple(s1, s2, s3, unsafe: bool = False) -> MeanTriple:
    """Check the hypotheses for a triple of two-variable means.

    Valid triples are non-trivial and either all arithmetic or contain at
    most one arithmetic member.

    Raises
    ------
    InvalidTriple
        If some mean is trivial.
    HypothesisViolation
        Two arithmetic means next to a non-arithmetic one (unless ``unsafe``).
    """
    sigmas = (s1, s2, s3)
    trivial = [i for i, s in enumerate(sigmas) if s.is_trivial]
    if trivial:
        raise InvalidTriple(f"means at positions {trivial} are trivial")
    for s in sigmas:
        ka.weight_of(s)
    arith = [i for i, s in enumerate(sigmas) if s.is_arithmetic]
    if len(arith) == 3:
        validity = ALL_ARITHMETIC
    elif len(arith) <= 1:
        validity = AT_MOST_ONE_ARITHMETIC
    elif unsafe:
        validity = UNSAFE
    else:
        raise HypothesisViolation(
            f"means at positions {arith} are arithmetic while another is not; "
            "need all arithmetic or at most one arithmetic", arith)
    prof = gamma_from_weights_3(*(s.weight for s in sigmas))
    return MeanTriple(sigmas, prof.p, validity, prof)


def _as_triple(triple, cfg):
    if isinstance(triple, MeanTriple):
        return triple
    return validate_triple(*triple, unsafe=cfg.unsafe_allow)


def validate_multimeans(means: Sequence[MultiMean], unsafe: bool = False) -> StochasticProfile:
    """Check the hypotheses for ``n + 1`` means of arity ``n``; return the weight profile.

    Raises
    ------
    InvalidTriple
        Wrong count or arity, or a trivial mean.
    NotAffinelyDominated, NonPrimitive, HypothesisViolation
        Unless ``unsafe``.
    """
    means = list(means)
    m = len(means)
    if m < 3 or any(M.arity != m - 1 for M in means):
        raise InvalidTriple(f"need n+1 means of arity n, got {m} means of arities "
                            f"{[M.arity for M in means]}")
    trivial = [k for k, M in enumerate(means) if M.is_trivial]
    if trivial:
        raise InvalidTriple(f"means at positions {trivial} are trivial")
    bad = [k for k, M in enumerate(means)
           if not M.affinely_dominated or np.any(np.asarray(M.weights) <= 0)]
    if bad and not unsafe:
        raise NotAffinelyDominated(f"means at positions {bad} are not affinely dominated")
    if not all(M.is_arithmetic for M in means):
        loose = [k for k, M in enumerate(means) if not M.strictly_concave]
        if len(loose) > 1 and not unsafe:
            raise HypothesisViolation(
                f"means at positions {loose} are not strictly concave; "
                "need all arithmetic or at most one not strictly concave", loose)
    return gamma_from_multimeans([M.weights for M in means], unsafe=unsafe)


# -- iteration --------------------------------------------------------------

def alm_step(triple, a, b, c, eps: float = 0.0):
    """One application of ``(A, B, C) -> (B s1 C, C s2 A, A s3 B)``."""
    s1, s2, s3 = triple.sigmas if isinstance(triple, MeanTriple) else triple
    return (ka.evaluate(s1, b, c, eps), ka.evaluate(s2, c, a, eps), ka.evaluate(s3, a, b, eps))


def _aggregate(p, mats):
    """``sum p_k X_k``; equal members are returned as is, since ``sum p_k`` may miss 1 by an ulp."""
    if all(np.array_equal(mats[0], m) for m in mats[1:]):
        return mats[0].copy()
    out = p[0] * mats[0]
    for pk, m in zip(p[1:], mats[1:]):
        out = out + pk * m
    return out


def _probes(dim, count=3):
    rng = np.random.default_rng(0)
    x = rng.standard_normal((count, dim))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _prepare(operators):
    mats = [linalg.symmetrize(m) for m in operators]
    dims = {m.shape for m in mats}
    if len(dims) != 1:
        raise DomainError(f"operators must share one dimension, got {sorted(dims)}")
    kinds = [linalg.definiteness(m) for m in mats]
    if "indefinite" in kinds:
        raise DomainError(f"operator {kinds.index('indefinite')} is not positive semidefinite")
    return mats, all(k == "definite" for k in kinds)


def _iterate(step, mats, p, cfg: AlmConfig, gap: float) -> AlmOutcome:
    s_prev = _aggregate(p, mats)
    s0_norm = float(np.linalg.norm(s_prev, 2))
    probes = _probes(s_prev.shape[0])
    trace = []
    worst = 0.0
    reason = MAX_ITER
    n = 0
    while True:
        dist = max_pairwise_thompson(mats)
        if dist <= cfg.tol:
            reason = CONVERGED
        if reason == CONVERGED or n == cfg.max_iter:
            trace.append(TraceRecord(n, dist, [float(x @ s_prev @ x) for x in probes], 0.0))
            break
        mats = list(step(mats))
        s = _aggregate(p, mats)
        diff = s_prev - s
        worst = min(worst, linalg.min_eig(diff))
        if n % cfg.trace_every == 0:
            trace.append(TraceRecord(n, dist, [float(x @ s_prev @ x) for x in probes],
                                     float(np.linalg.norm(diff))))
        s_prev = s
        n += 1
    out = AlmOutcome(limit=linalg.symmetrize(s_prev, check=False), p=np.asarray(p), iterations=n,
                     stop_reason=reason, trace=trace, s_monotone_violation=worst,
                     s0_norm=s0_norm, final_distance=dist, spectral_gap=gap, members=mats,
                     tol_used=cfg.tol)
    log.debug("ALM stopped after %d iterations (%s), distance %.3e", n, reason, dist)
    if reason == MAX_ITER:
        raise NonConverged(
            f"no convergence after {n} iterations: max pairwise Thompson distance "
            f"{dist:.3e} > tol {cfg.tol:.1e}", out)
    return out


def _closed(limit, p, gap, members=None):
    return AlmOutcome(limit=linalg.symmetrize(limit, check=False), p=np.asarray(p),
                      iterations=0, stop_reason=CLOSED_FORM, spectral_gap=gap,
                      members=members or [])


def default_eps(mats) -> float:
    scale = float(np.mean([np.trace(m) / m.shape[0] for m in mats]))
    return 1e-10 * scale if scale > 0 else 1e-10


def eps_rungs(cfg: AlmConfig, mats) -> list:
    """Decreasing shifts ending at the configured (or default) ``eps_shift``."""
    base = default_eps(mats) if cfg.eps_shift is None else cfg.eps_shift
    top = cfg.ladder_length - 1
    return [base * cfg.eps_ladder ** (j - top) for j in range(cfg.ladder_length)]


# Shifted semidefinite inputs have condition numbers near 1 / eps, and the
# Thompson distance between members then stalls near u * kappa (measured
# worst case about 0.5 u kappa), so ladder runs stop at this multiple of it.
ROUNDOFF_FLOOR_C = 4.0


def regularized_tol(cfg: AlmConfig, mats) -> float:
    kappa = max(np.linalg.cond(m) for m in mats)
    return max(cfg.tol, ROUNDOFF_FLOOR_C * np.finfo(float).eps * kappa)


def _solve(run, mats, definite, cfg):
    """Run directly on definite inputs, else along a decreasing shift ladder."""
    if definite:
        return run(mats, replace(cfg, tol=regularized_tol(cfg, mats)) if cfg.adaptive_tol else cfg)
    ladder = []
    out = None
    for eps in eps_rungs(cfg, mats):
        shifted = [m + eps * np.eye(mats[0].shape[0]) for m in mats]
        out = run(shifted, replace(cfg, tol=regularized_tol(cfg, shifted)))
        ladder.append((eps, out.limit))
    out.ladder = ladder
    return out


def alm_compute(triple, a, b, c, cfg: AlmConfig | None = None) -> AlmOutcome:
    """Limit of the three-variable ALM sequence.

    Parameters
    ----------
    triple : MeanTriple or sequence of three TwoVarMean
    a, b, c : array_like
        Positive semidefinite matrices of one dimension (scalars allowed).
    cfg : AlmConfig, optional

    Returns
    -------
    AlmOutcome
        ``limit`` is ``p1 A_n + p2 B_n + p3 C_n`` at the stopping index.
        All-arithmetic triples give ``p1 A + p2 B + p3 C`` and all-harmonic
        triples ``(p1 A^-1 + p2 B^-1 + p3 C^-1)^-1`` without iterating unless
        ``cfg.force_iterate``.  Semidefinite inputs are shifted by a
        decreasing ladder of ``eps I``; the last rung is returned.

    Raises
    ------
    NonConverged
        If ``cfg.max_iter`` is reached; the partial outcome is attached.
    """
    cfg = cfg or AlmConfig()
    triple = _as_triple(triple, cfg)
    mats, definite = _prepare((a, b, c))
    p, gap = triple.p, triple.profile.spectral_gap
    if triple.validity == ALL_ARITHMETIC and not cfg.force_iterate:
        return _closed(_aggregate(p, mats), p, gap)
    harmonic = all(s.kind == "harmonic" for s in triple.sigmas)

    def run(ms, c):
        if harmonic and not c.force_iterate:
            return _closed(linalg.inv(_aggregate(p, [linalg.inv(m) for m in ms])), p, gap)
        return _iterate(lambda xs: alm_step(triple, *xs), ms, p, c, gap)

    return _solve(run, mats, definite, cfg)


def alm_mean(sigmas, a, b, c, cfg: AlmConfig | None = None) -> np.ndarray:
    """Shorthand for ``alm_compute(sigmas, a, b, c, cfg).limit``."""
    return alm_compute(sigmas, a, b, c, cfg).limit


def alm_compute_n(means: Sequence[MultiMean], operators, cfg: AlmConfig | None = None) -> AlmOutcome:
    """Limit of ``A^(k) -> M_k(A^(k+1 mod n+1), ..., A^(k+n mod n+1))``.

    Raises
    ------
    NotAffinelyDominated, NonPrimitive, HypothesisViolation
        The convergence hypotheses fail (skipped with
        ``cfg.unsafe_allow``).
    NonConverged
    """
    cfg = cfg or AlmConfig()
    means = list(means)
    prof = validate_multimeans(means, unsafe=cfg.unsafe_allow)
    operators = list(operators)
    if len(operators) != len(means):
        raise ParameterError(f"{len(means)} means need {len(means)} operators, got {len(operators)}")
    mats, definite = _prepare(operators)
    p, gap = prof.p, prof.spectral_gap
    if all(M.is_arithmetic for M in means) and prof.primitive and not cfg.force_iterate:
        return _closed(_aggregate(p, mats), p, gap)
    m = len(means)

    def step(xs):
        return [means[k].evaluator([xs[(k + i) % m] for i in range(1, m)]) for k in range(m)]

    return _solve(lambda ms, c: _iterate(step, ms, p, c, gap), mats, definite, cfg)


def build_alm_multimean(triple, cfg: AlmConfig | None = None) -> MultiMean:
    """The three-variable mean ``M_{s1,s2,s3}`` as a :class:`MultiMean`.

    Dominated by ``p1 A + p2 B + p3 C`` and strictly concave unless the
    triple is all arithmetic; permutation invariant when ``s1 = s2 = s3``
    is symmetric.
    """
    cfg = cfg or AlmConfig()
    triple = _as_triple(triple, cfg)
    s1, s2, s3 = triple.sigmas
    symmetric = ka.same_mean(s1, s2) and ka.same_mean(s2, s3) and s1.is_symmetric
    arith = triple.validity == ALL_ARITHMETIC

    def ev(xs):
        return alm_compute(triple, xs[0], xs[1], xs[2], cfg).limit

    return MultiMean(
        arity=3, evaluator=ev, weights=np.asarray(triple.p),
        affinely_dominated=True, strictly_concave=not arith, is_arithmetic=arith,
        permutation_invariant=symmetric, name=f"M[{s1},{s2},{s3}]",
    )


def build_alm_n_multimean(means: Sequence[MultiMean], cfg: AlmConfig | None = None) -> MultiMean:
    """The ``(n+1)``-variable mean obtained from ``n + 1`` means of arity ``n``."""
    cfg = cfg or AlmConfig()
    means = list(means)
    prof = validate_multimeans(means, unsafe=cfg.unsafe_allow)
    arith = all(M.is_arithmetic for M in means)
    first = means[0]
    symmetric = first.permutation_invariant and all(M is first for M in means)

    def ev(xs):
        return alm_compute_n(means, xs, cfg).limit

    return MultiMean(
        arity=len(means), evaluator=ev, weights=np.asarray(prof.p),
        affinely_dominated=True, strictly_concave=not arith, is_arithmetic=arith,
        permutation_invariant=symmetric,
        name="M[" + ",".join(M.name for M in means) + "]",
    )


def estimate_weight_vector(M: MultiMean, h: float = 1e-5) -> np.ndarray:
    """Partial derivatives of ``t -> M(1, ..., t, ..., 1)`` at ``t = 1``.

    For a mean dominated by ``sum r_k A_k`` these are the ``r_k``.

    Raises
    ------
    WeightEstimationFailure
        If the estimates sum to 1 only up to more than 1e-3.
    """
    est = np.empty(M.arity)
    for j in range(M.arity):
        vals = []
        for t in (1.0 + h, 1.0 - h):
            args = [np.ones((1, 1)) for _ in range(M.arity)]
            args[j] = np.full((1, 1), t)
            vals.append(float(np.asarray(M(*args)).reshape(-1)[0]))
        est[j] = (vals[0] - vals[1]) / (2.0 * h)
    dev = abs(est.sum() - 1.0)
    if dev > 1e-3:
        raise WeightEstimationFailure(f"estimated weights sum to {est.sum():.6f}")
    if dev > 1e-4:
        log.warning("estimated weights of %s sum to %.6f", M.name, est.sum())
    return est


# -- ordered inputs ---------------------------------------------------------

@dataclass
class OrderedRun:
    """Diagnostics of an ALM run from Loewner-ordered inputs.

    ``pattern_violation`` is the most negative eigenvalue seen among the
    required differences ``A^(k)_m - A^(k+1)_m`` (even ``m``) or
    ``A^(k+1)_m - A^(k)_m`` (odd ``m``); ``monotone_violation`` likewise for
    the even subsequence decreasing and the odd one increasing.
    """

    limit: np.ndarray
    iterations: int
    stop_reason: str
    pattern_violation: float
    monotone_violation: float
    residuals_first: list
    residuals_last: list


def ordered_convergence_run(M: MultiMean, operators, cfg: AlmConfig | None = None,
                            slack: float = 1e-12) -> OrderedRun:
    """Run the recursion with ``(M, ..., M)`` from ``A^(0) >= ... >= A^(n)``.

    Raises
    ------
    PreconditionError
        If ``M`` is not permutation invariant or the inputs are not
        definite and ordered.
    """
    cfg = cfg or AlmConfig()
    if not M.permutation_invariant:
        raise PreconditionError("ordered convergence needs a permutation invariant mean")
    mats, definite = _prepare(operators)
    if len(mats) != M.arity + 1:
        raise PreconditionError(f"need {M.arity + 1} operators, got {len(mats)}")
    if not definite:
        raise PreconditionError("ordered convergence runs need definite operators")
    scale = max(np.linalg.norm(x, 2) for x in mats)
    for k in range(len(mats) - 1):
        if not linalg.loewner_leq(mats[k + 1], mats[k], slack * scale):
            raise PreconditionError(f"operators {k} and {k + 1} are not in decreasing order")
    m = len(mats)
    p = np.full(m, 1.0 / m)

    def step(xs):
        return [M.evaluator([xs[(k + i) % m] for i in range(1, m)]) for k in range(m)]

    history = [mats]
    pattern = 0.0
    monotone = 0.0
    reason = MAX_ITER
    for n in range(cfg.max_iter + 1):
        cur = history[-1]
        sign = 1.0 if n % 2 == 0 else -1.0
        for k in range(m - 1):
            pattern = min(pattern, linalg.min_eig(sign * (cur[k] - cur[k + 1])))
        if n >= 2:
            # even steps decrease, odd steps increase
            prev = history[-3][0]
            monotone = min(monotone, linalg.min_eig(sign * (prev - cur[0])))
        if max_pairwise_thompson(cur) <= cfg.tol:
            reason = CONVERGED
            break
        if n == cfg.max_iter:
            break
        history.append(step(cur))
    limit = _aggregate(p, history[-1])
    return OrderedRun(
        limit=limit, iterations=len(history) - 1, stop_reason=reason,
        pattern_violation=pattern, monotone_violation=monotone,
        residuals_first=[float(np.linalg.norm(h[0] - limit)) for h in history],
        residuals_last=[float(np.linalg.norm(h[-1] - limit)) for h in history],
    )


def with_config(cfg: AlmConfig | None, **changes) -> AlmConfig:
    return replace(cfg or AlmConfig(), **changes)
