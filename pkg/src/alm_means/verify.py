"""
Registry of seeded property checks.

Each :class:`PropertyCheck` draws inputs from a sampler and scores them with
a predicate returning a *margin*: the trial passes when the margin is
``>= 0``.  Samplers receive their own generator seeded with
``seed ^ crc32(name)``, so running a subset of checks (or running them in a
different order) never changes the inputs a given check sees.

Checks flagged ``asserted=False`` record open conjectures: they are run and
reported but never make the report fail.
"""
from __future__ import annotations

import fnmatch
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import alm, linalg, metrics, stochastic
from . import kubo_ando as ka
from .errors import (
    AlmError,
    HypothesisViolation,
    InvalidTriple,
    NonConverged,
    NonPrimitive,
    NotAffinelyDominated,
    SingularInput,
    UnknownCheck,
)

FAST = alm.AlmConfig()
ITER = alm.AlmConfig(force_iterate=True)
# congruence by T squares the condition number, pushing the round-off floor above 1e-12
ADAPTIVE = alm.AlmConfig(adaptive_tol=True)


# -- samplers ---------------------------------------------------------------

def random_orthogonal(rng, dim):
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_spd(rng, dim, lo=1e-2, hi=1e2):
    """``Q diag(lam) Q^T`` with ``lam`` log-uniform in ``[lo, hi]``."""
    q = random_orthogonal(rng, dim)
    lam = np.exp(rng.uniform(np.log(lo), np.log(hi), dim))
    return linalg.symmetrize((q * lam) @ q.T, check=False)


def random_psd(rng, dim, rank=None, scale=1.0):
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank))
    return scale * (g @ g.T) / max(rank, 1)


def random_transformer(rng, dim):
    """PSD ``T`` whose eigenvalues are exactly 0 or log-uniform in [0.1, 10]."""
    q = random_orthogonal(rng, dim)
    lam = np.exp(rng.uniform(np.log(0.1), np.log(10.0), dim))
    lam[rng.permutation(dim)[:int(rng.integers(0, dim))]] = 0.0
    return (q * lam) @ q.T


def ordered_pair(rng, dim):
    """``(A, B)`` with ``A <= B``, built as ``B = A + PSD``."""
    a = random_spd(rng, dim)
    return a, a + random_psd(rng, dim, rank=int(rng.integers(1, dim + 1)),
                             scale=float(rng.uniform(0.01, 10.0)))


def commuting_spd(rng, dim, count=3):
    q = random_orthogonal(rng, dim)
    lams = [np.exp(rng.uniform(np.log(1e-2), np.log(1e2), dim)) for _ in range(count)]
    return q, lams, [linalg.symmetrize((q * lam) @ q.T, check=False) for lam in lams]


def random_weight(rng):
    return float(rng.uniform(0.15, 0.85))


def random_valid_triple(rng, kinds=("geometric", "harmonic", "arithmetic")):
    """Three built-in means with at most one arithmetic member."""
    while True:
        picks = [str(rng.choice(kinds)) for _ in range(3)]
        if picks.count("arithmetic") <= 1:
            break
    return tuple(ka.make_mean(k, random_weight(rng)) for k in picks)


def random_geometric_triple(rng):
    return tuple(ka.geometric(random_weight(rng)) for _ in range(3))


def _dim(rng, dims):
    return int(rng.choice(dims))


# -- margins ----------------------------------------------------------------

def loewner_margin(lo, hi, slack):
    """``min eig(hi - lo) + slack``: nonnegative iff ``lo <= hi`` up to slack."""
    return linalg.min_eig(np.asarray(hi) - np.asarray(lo)) + slack


def frob(a, b):
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def raises(fn, *exc_types):
    """Margin 1 if ``fn()`` raises one of ``exc_types``, else -1."""
    try:
        fn()
    except exc_types:
        return 1.0
    return -1.0


# -- registry ---------------------------------------------------------------

@dataclass(frozen=True)
class PropertyCheck:
    name: str
    statement: str
    sampler: Callable
    predicate: Callable
    trials: int = 20
    slack: float = 0.0
    asserted: bool = True
    dims: tuple = (1, 2, 3, 4)


@dataclass
class CheckResult:
    name: str
    statement: str
    trials: int
    failures: int
    worst_margin: float
    asserted: bool
    seconds: float
    witness: dict | None = None
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def to_dict(self) -> dict:
        out = {
            "name": self.name, "statement": self.statement, "trials": self.trials,
            "failures": self.failures, "worst_margin": self.worst_margin,
            "asserted": self.asserted, "seconds": round(self.seconds, 3),
        }
        if self.witness is not None:
            out["witness"] = self.witness
        if self.error:
            out["error"] = self.error
        return out


@dataclass
class Report:
    seed: int
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.passed for r in self.results if r.asserted)

    def lines(self):
        for r in self.results:
            tag = ("PASS" if r.passed else "FAIL") if r.asserted else "INFO"
            yield (f"{tag} {r.name}: {r.trials - r.failures}/{r.trials} trials, "
                   f"worst margin {r.worst_margin:.3e}")

    def to_dict(self) -> dict:
        return {"seed": self.seed, "ok": self.ok, "checks": [r.to_dict() for r in self.results]}


REGISTRY: dict[str, PropertyCheck] = {}


def register(name, statement, trials=20, slack=0.0, asserted=True, dims=(1, 2, 3, 4)):
    """Decorator: ``fn(rng, dim) -> (inputs, margin)`` becomes a check."""
    def wrap(fn):
        def sampler(rng, dim):
            return {"rng": rng, "dim": dim}

        def predicate(inputs):
            return fn(inputs["rng"], inputs["dim"])

        REGISTRY[name] = PropertyCheck(name, statement, sampler, predicate,
                                       trials, slack, asserted, tuple(dims))
        return fn
    return wrap


def check_seed(seed: int, name: str) -> int:
    return (int(seed) ^ zlib.crc32(name.encode())) & 0xFFFFFFFFFFFFFFFF


def select(patterns) -> list:
    if isinstance(patterns, str):
        patterns = [patterns]
    names = [n for n in REGISTRY if any(fnmatch.fnmatchcase(n, p) for p in patterns)]
    if not names:
        raise UnknownCheck(f"no registered check matches {list(patterns)}")
    return names


def run_check(name: str, seed: int = 0, trials: int | None = None,
              dim: int | None = None) -> CheckResult:
    if name not in REGISTRY:
        raise UnknownCheck(name)
    check = REGISTRY[name]
    rng = np.random.default_rng(check_seed(seed, name))
    n = check.trials if trials is None else int(trials)
    failures, worst, witness, error = 0, math.inf, None, None
    start = time.perf_counter()
    for t in range(n):
        d = int(dim) if dim is not None else int(rng.choice(check.dims))
        state = rng.bit_generator.state
        try:
            result = check.predicate(check.sampler(rng, d))
        except (AlmError, np.linalg.LinAlgError, ArithmeticError) as exc:
            result = ({"exception": f"{type(exc).__name__}: {exc}"}, -math.inf)
        inputs, margin = result if isinstance(result, tuple) else ({}, result)
        margin = float(margin)
        worst = min(worst, margin)
        if not margin >= 0.0:
            failures += 1
            if witness is None:
                witness = {"trial": t, "dim": d, "margin": margin,
                           "generator_state": state, "inputs": inputs}
                if isinstance(inputs, dict) and "exception" in inputs:
                    error = inputs["exception"]
    return CheckResult(name, check.statement, n, failures, worst, check.asserted,
                       time.perf_counter() - start, witness, error)


def run_checks(selection=("*",), seed: int = 0, trials: int | None = None,
               dim: int | None = None) -> Report:
    """Run every check whose name matches one of the glob patterns.

    Raises
    ------
    UnknownCheck
        If no check matches.
    """
    report = Report(seed=int(seed))
    for name in select(selection):
        report.results.append(run_check(name, seed, trials, dim))
    return report


# Checks return ``(inputs, margin)`` so failures carry their inputs.

# -- linalg -----------------------------------------------------------------

@register("linalg.identity_function", "spectral calculus with f(t) = t reproduces A",
          dims=(1, 2, 4, 8, 16))
def _(rng, dim):
    a = random_spd(rng, dim)
    got = linalg.apply_spectral_function(a, lambda t: t)
    return {"a": a}, linalg.reconstruction_bound(a) - frob(got, a)


@register("linalg.sqrt_squared", "sqrtm(A) squared recovers A to 1e-10 relative",
          dims=(1, 2, 4, 8, 16))
def _(rng, dim):
    a = random_spd(rng, dim)
    s = linalg.sqrtm(a)
    return {"a": a}, 1e-10 * np.linalg.norm(a) - frob(s @ s, a)


@register("linalg.congruence_inverse",
          "congruence by S then by S^-1 is the identity for symmetric invertible S")
def _(rng, dim):
    a = random_spd(rng, dim)
    q = random_orthogonal(rng, dim)
    s = (q * (rng.choice([-1.0, 1.0], dim) * np.exp(rng.uniform(-1, 1, dim)))) @ q.T
    back = linalg.congruence(s, linalg.congruence(np.linalg.inv(s), a))
    return {"a": a, "s": s}, 1e-10 * np.linalg.norm(a) - frob(back, a)


@register("linalg.loewner_partial_order",
          "Loewner comparison is reflexive, antisymmetric and transitive on diagonals",
          trials=100)
def _(rng, dim):
    x, y, z = (np.diag(rng.uniform(0, 3, dim)) for _ in range(3))
    ok = linalg.loewner_leq(x, x)
    if linalg.loewner_leq(x, y) and linalg.loewner_leq(y, x):
        ok &= np.allclose(x, y)
    if linalg.loewner_leq(x, y) and linalg.loewner_leq(y, z):
        ok &= linalg.loewner_leq(x, z)
    lo = np.minimum(np.diag(x), np.diag(y))
    ok &= linalg.loewner_leq(np.diag(lo), x) and linalg.loewner_leq(np.diag(lo), y)
    return {"x": x, "y": y, "z": z}, 1.0 if ok else -1.0


# -- two-variable means -----------------------------------------------------

@register("kubo_ando.monotonicity",
          "A <= C and B <= D imply A s B <= C s D", trials=50)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(ka.BUILTIN_KINDS)), random_weight(rng))
    if rng.random() < 0.5:
        a, b = np.diag(rng.uniform(0.01, 10, dim)), np.diag(rng.uniform(0.01, 10, dim))
        c, d = a + np.diag(rng.uniform(0, 5, dim)), b + np.diag(rng.uniform(0, 5, dim))
    else:
        a, c = ordered_pair(rng, dim)
        b, d = ordered_pair(rng, dim)
    lhs, rhs = ka.evaluate(sigma, a, b), ka.evaluate(sigma, c, d)
    return {"sigma": sigma, "a": a, "b": b, "c": c, "d": d}, loewner_margin(lhs, rhs, 1e-10)


@register("kubo_ando.transformer_inequality",
          "T (A s B) T <= (TAT) s (TBT) for PSD T", trials=50)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(ka.BUILTIN_KINDS)), random_weight(rng))
    a, b = random_spd(rng, dim), random_spd(rng, dim)
    t = random_transformer(rng, dim)
    lhs = t @ ka.evaluate(sigma, a, b) @ t
    ta, tb = t @ a @ t, t @ b @ t
    try:
        rhs = ka.evaluate(sigma, ta, tb)
    except SingularInput:
        rhs = ka.evaluate(sigma, ta, tb, eps=1e-10 * np.trace(ta))
    return {"sigma": sigma, "a": a, "b": b, "t": t}, loewner_margin(lhs, rhs, 1e-8)


@register("kubo_ando.strict_concavity",
          "a non-arithmetic mean lies strictly below the weighted average off the diagonal",
          trials=30)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(["geometric", "harmonic"])), random_weight(rng))
    grid = np.logspace(-2, 2, 9)
    r = sigma.weight
    gaps = [(1 - r) * x + r * y - ka.scalar_mean(sigma, x, y)
            for x in grid for y in grid if x != y]
    worst = min(gaps)
    return {"sigma": sigma}, worst if worst > 0 else -1.0


@register("kubo_ando.adjoint_involution", "adjoint applied twice gives the same mean",
          trials=30)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(ka.BUILTIN_KINDS)), random_weight(rng))
    twice = ka.adjoint(ka.adjoint(sigma))
    return {"sigma": sigma}, 1.0 if ka.functions_agree(sigma.f, twice.f) else -1.0


@register("kubo_ando.transpose_involution", "transpose applied twice gives the same mean",
          trials=30)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(ka.BUILTIN_KINDS)), random_weight(rng))
    twice = ka.transpose(ka.transpose(sigma))
    return {"sigma": sigma}, 1.0 if ka.functions_agree(sigma.f, twice.f) else -1.0


@register("kubo_ando.commuting_diagonal",
          "on commuting inputs the matrix mean is the entrywise scalar mean", trials=50)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(ka.BUILTIN_KINDS)), random_weight(rng))
    q, (la, lb), (a, b) = commuting_spd(rng, dim, 2)
    want = (q * np.array([ka.scalar_mean(sigma, x, y) for x, y in zip(la, lb)])) @ q.T
    return {"sigma": sigma, "a": a, "b": b}, 1e-10 - frob(ka.evaluate(sigma, a, b), want)


@register("kubo_ando.scalar_transfer",
          "<(A s B)x, x> <= <Ax, x> s <Bx, x> for unit vectors x", trials=50)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(ka.BUILTIN_KINDS)), random_weight(rng))
    a, b = random_spd(rng, dim), random_spd(rng, dim)
    x = rng.standard_normal(dim)
    x /= np.linalg.norm(x)
    lhs = float(x @ ka.evaluate(sigma, a, b) @ x)
    rhs = ka.scalar_mean(sigma, float(x @ a @ x), float(x @ b @ x))
    return {"sigma": sigma, "a": a, "b": b, "x": x}, rhs - lhs + 1e-10 * max(1.0, rhs)


# -- stochastic matrices ----------------------------------------------------

@register("stochastic.power_convergence",
          "rows of the 200th power of a primitive weight matrix equal p", trials=30)
def _(rng, dim):
    # weights in [0.1, 0.9] keep |lambda_2| <= 0.9, so the 200th power is within ~1e-9
    if rng.random() < 0.5:
        gamma = stochastic.gamma3(*rng.uniform(0.1, 0.9, 3))
    else:
        w = rng.dirichlet(np.ones(4), size=5)
        gamma = stochastic.cyclic_gamma(0.6 * w + 0.1)
    p = stochastic.perron_vector(gamma)
    err = np.max(np.abs(np.linalg.matrix_power(gamma, 200) - p[None, :]))
    return {"gamma": gamma}, 1e-8 - err


@register("stochastic.closed_form_vs_eigen",
          "the closed-form p matches the eigen-solved Perron vector on a 10x10x10 grid",
          trials=1)
def _(rng, dim):
    grid = np.linspace(0.05, 0.95, 10)
    worst = 0.0
    for r1 in grid:
        for r2 in grid:
            for r3 in grid:
                p = stochastic.perron_vector(stochastic.gamma3(r1, r2, r3))
                worst = max(worst, np.max(np.abs(p - stochastic.closed_form_p3(r1, r2, r3))))
    return {"grid": grid}, 1e-12 - worst


@register("stochastic.cyclic_relabeling",
          "rotating the three weights rotates p the same way", trials=1)
def _(rng, dim):
    grid = np.linspace(0.05, 0.95, 10)
    worst = 0.0
    for r1 in grid:
        for r2 in grid:
            for r3 in grid:
                p = stochastic.closed_form_p3(r1, r2, r3)
                q = stochastic.perron_vector(stochastic.gamma3(r2, r3, r1))
                worst = max(worst, np.max(np.abs(q - np.roll(p, -1))))
    return {"grid": grid}, 1e-12 - worst


@register("stochastic.nonprimitive_not_cauchy",
          "powers of a non-primitive weight matrix keep moving", trials=1)
def _(rng, dim):
    floor = math.inf
    for gamma in (stochastic.cyclic_shift(3), stochastic.cyclic_averaging_gamma()):
        power = np.eye(len(gamma))
        for _ in range(201):
            nxt = power @ gamma
            floor = min(floor, np.linalg.norm(nxt - power))
            power = nxt
    return {}, floor - 0.5


# -- counterexamples --------------------------------------------------------

def nondominated_means():
    """Six arithmetic 5-variable means whose weight matrix is not primitive."""
    even = [0.0, 0.5, 0.5, 0.0, 0.0]
    odd = [0.5, 0.5, 0.0, 0.0, 0.0]
    return [alm.arithmetic_multimean(even if k % 2 == 0 else odd) for k in range(6)]


@register("counterexample.nonprimitive_cyclic3",
          "the 3x3 cyclic shift is flagged non-primitive", trials=1)
def _(rng, dim):
    primitive, _gap = stochastic.check_primitive(stochastic.cyclic_shift(3))
    return {}, -1.0 if primitive else 1.0


@register("counterexample.nonprimitive6",
          "the zero-weight 5-variable construction is rejected and its weight matrix "
          "is flagged non-primitive", trials=1)
def _(rng, dim):
    means = nondominated_means()
    mats = [np.array([[float(k + 1)]]) for k in range(6)]
    rejected = raises(lambda: alm.alm_compute_n(means, mats), NotAffinelyDominated, NonPrimitive)
    primitive, _ = stochastic.check_primitive(stochastic.cyclic_averaging_gamma())
    return {}, min(rejected, -1.0 if primitive else 1.0)


@register("counterexample.unsafe_floor",
          "forcing the zero-weight construction leaves a distance floor that never decays",
          trials=1)
def _(rng, dim):
    cfg = alm.AlmConfig(max_iter=200, unsafe_allow=True)
    mats = [np.array([[float(k + 1)]]) for k in range(6)]
    try:
        alm.alm_compute_n(nondominated_means(), mats, cfg)
    except NonConverged as exc:
        dists = [t.max_distance for t in exc.outcome.trace]
        return {"distances": dists[-5:]}, min(dists[100:]) - 0.1
    return {}, -1.0


@register("counterexample.two_arithmetic",
          "two arithmetic means next to a non-arithmetic one violate the hypotheses",
          trials=10)
def _(rng, dim):
    g = ka.make_mean(str(rng.choice(["geometric", "harmonic"])), random_weight(rng))
    means = [ka.arithmetic(random_weight(rng)), ka.arithmetic(random_weight(rng)), g]
    order = rng.permutation(3)
    triple = [means[i] for i in order]
    try:
        alm.validate_triple(*triple)
    except HypothesisViolation as exc:
        expected = sorted(int(np.where(order == i)[0][0]) for i in (0, 1))
        return {"triple": triple}, 1.0 if list(exc.indices) == expected else -1.0
    return {"triple": triple}, -1.0


@register("counterexample.trivial_member", "a trivial mean cannot enter a triple", trials=1)
def _(rng, dim):
    return {}, raises(lambda: alm.validate_triple(ka.make_mean("left"), ka.geometric(),
                                                  ka.geometric()), InvalidTriple)


# -- ALM engine -------------------------------------------------------------

MONOTONE_TRIPLES = (
    (ka.geometric(0.5), ka.geometric(0.5), ka.geometric(0.5)),
    (ka.geometric(1 / 3), ka.harmonic(0.5), ka.geometric(2 / 3)),
    (ka.arithmetic(0.5), ka.harmonic(0.5), ka.geometric(0.5)),
)


def monotone_triple(rng):
    k = int(rng.integers(0, len(MONOTONE_TRIPLES) + 1))
    return MONOTONE_TRIPLES[k] if k < len(MONOTONE_TRIPLES) else random_valid_triple(rng)


@register("alm.s_monotone",
          "the aggregate S_n decreases in Loewner order and the members meet within tol",
          trials=40, dims=(1, 2, 4, 8))
def _(rng, dim):
    triple = monotone_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    out = alm.alm_compute(triple, *mats, ITER)
    margin = min(out.s_monotone_violation + 1e-9 * out.s0_norm,
                 ITER.tol - out.final_distance,
                 float(ITER.max_iter - out.iterations))
    return {"triple": triple, "matrices": mats}, margin


@register("alm.common_limit",
          "quadratic forms of the final members agree to 10 tol on random probes",
          trials=30, dims=(1, 2, 4, 8))
def _(rng, dim):
    triple = random_valid_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    out = alm.alm_compute(triple, *mats, ITER)
    scale = np.linalg.norm(out.limit, 2)
    worst = 0.0
    for _ in range(10):
        x = rng.standard_normal(dim)
        q = [float(x @ m @ x) for m in out.members]
        worst = max(worst, max(q) - min(q) - 10 * ITER.tol * scale * (x @ x))
    return {"triple": triple, "matrices": mats}, -worst


@register("alm.sandwich",
          "the weighted harmonic mean <= M <= the weighted arithmetic mean", trials=50)
def _(rng, dim):
    triple = random_valid_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    out = alm.alm_compute(triple, *mats)
    p = out.p
    arith = sum(pk * m for pk, m in zip(p, mats))
    harm = np.linalg.inv(sum(pk * np.linalg.inv(m) for pk, m in zip(p, mats)))
    margin = min(loewner_margin(harm, out.limit, 1e-9), loewner_margin(out.limit, arith, 1e-9))
    return {"triple": triple, "matrices": mats}, margin


def raise_mean(rng, sigma, arithmetic_left):
    """A mean at least as large as ``sigma`` with the same weight."""
    ladder = ["harmonic", "geometric"] + (["arithmetic"] if arithmetic_left else [])
    start = ladder.index(sigma.kind) if sigma.kind in ladder else len(ladder) - 1
    return ka.make_mean(ladder[int(rng.integers(start, len(ladder)))], sigma.weight)


@register("alm.mean_order", "raising each two-variable mean raises M", trials=50)
def _(rng, dim):
    low = random_valid_triple(rng, kinds=("geometric", "harmonic"))
    high = []
    for s in low:
        high.append(raise_mean(rng, s, not any(h.is_arithmetic for h in high)))
    checks = all(ka.mean_leq(a, b) for a, b in zip(low, high))
    mats = [random_spd(rng, dim) for _ in range(3)]
    m_lo, m_hi = alm.alm_mean(low, *mats), alm.alm_mean(tuple(high), *mats)
    margin = loewner_margin(m_lo, m_hi, 1e-9) if checks else -1.0
    return {"low": low, "high": high, "matrices": mats}, margin


def _bounded_spd(rng, dim, lo, hi):
    q = random_orthogonal(rng, dim)
    return (q * rng.uniform(lo, hi, dim)) @ q.T


@register("alm.norm_perturbation",
          "|M(A,B,C) - M(A',B',C')| <= (hi/lo) max |X - X'| for inputs between lo I and hi I",
          trials=50)
def _(rng, dim):
    triple = random_valid_triple(rng)
    mats = [_bounded_spd(rng, dim, 2.0, 8.0) for _ in range(3)]
    size = float(rng.uniform(1e-3, 1.0))
    pert = []
    for m in mats:
        e = rng.standard_normal((dim, dim))
        e = (e + e.T) / 2
        pert.append(m + size * e / np.linalg.norm(e, 2))
    eigs = np.concatenate([np.linalg.eigvalsh(m) for m in mats + pert])
    lo, hi = eigs.min(), eigs.max()
    dev = max(np.linalg.norm(m - q, 2) for m, q in zip(mats, pert))
    diff = np.linalg.norm(alm.alm_mean(triple, *mats) - alm.alm_mean(triple, *pert), 2)
    return {"triple": triple, "matrices": mats, "perturbed": pert}, (hi / lo) * dev - diff + 1e-10


@register("alm.scalar_strict_concavity",
          "for a triple with a non-arithmetic member, scalar M equals p.(a,b,c) only when "
          "a = b = c", trials=4, dims=(1,))
def _(rng, dim):
    triple = random_valid_triple(rng)
    tv = alm.validate_triple(*triple)
    if tv.validity == alm.ALL_ARITHMETIC:
        return {"triple": triple}, 1.0
    grid = np.logspace(-1, 1, 4)
    worst = math.inf
    for a in grid:
        for b in grid:
            for c in grid:
                if abs(a - b) <= 1e-6 and abs(b - c) <= 1e-6:
                    continue
                m = float(alm.alm_mean(tv, a, b, c)[0, 0])
                worst = min(worst, float(np.dot(tv.p, (a, b, c))) - m - 1e-10)
    return {"triple": triple}, worst


@register("alm.n2_reduction",
          "the (n+1)-variable recursion with n = 2 reproduces the triple recursion exactly",
          trials=20)
def _(rng, dim):
    triple = random_valid_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    direct = alm.alm_compute(triple, *mats, ITER).limit
    via_n = alm.alm_compute_n([alm.from_two_var(s) for s in triple], mats, ITER).limit
    return {"triple": triple, "matrices": mats}, 1.0 if np.array_equal(direct, via_n) else -1.0


@register("alm.weight_estimation",
          "finite-difference weights of ALM means equal their Perron vectors", trials=1)
def _(rng, dim):
    cases = [
        (alm.arithmetic_multimean([0.25, 0.25, 0.5]), [0.25, 0.25, 0.5], 1e-8),
        (alm.build_alm_multimean((ka.geometric(),) * 3), [1 / 3] * 3, 1e-5),
        (alm.build_alm_multimean((ka.geometric(0.5), ka.geometric(1 / 3), ka.geometric(0.25))),
         [4 / 11, 3 / 11, 4 / 11], 1e-5),
    ]
    margin = min(tol - np.max(np.abs(alm.estimate_weight_vector(M) - np.asarray(w)))
                 for M, w, tol in cases)
    return {}, margin


@register("alm.ordered_interleaving",
          "from A >= B >= C a symmetric mean alternates the order and converges in norm",
          trials=30)
def _(rng, dim):
    sigma = ka.make_mean(str(rng.choice(ka.BUILTIN_KINDS)), 0.5)
    c = random_spd(rng, dim)
    b = c + random_psd(rng, dim, scale=float(rng.uniform(0.01, 10)))
    a = b + random_psd(rng, dim, scale=float(rng.uniform(0.01, 10)))
    run = alm.ordered_convergence_run(alm.from_two_var(sigma), [a, b, c])
    scale = np.linalg.norm(a, 2)
    margin = min(run.pattern_violation + 1e-9 * scale, run.monotone_violation + 1e-9 * scale,
                 1e-8 - run.residuals_first[-1], 1e-8 - run.residuals_last[-1])
    return {"sigma": sigma, "matrices": [a, b, c]}, margin


def _upward(rng, dim, triple):
    mats = [random_spd(rng, dim, 0.1, 10.0) for _ in range(3)]
    dirs = [linalg.min_eig(m) * random_psd(rng, dim) / 2 for m in mats]
    dirs = [d * (0.5 * linalg.min_eig(m) / max(np.linalg.norm(d, 2), 1e-300))
            for d, m in zip(dirs, mats)]
    target = alm.alm_mean(triple, *mats)
    prev = None
    margin = math.inf
    for k in range(12):
        xs = [m - 2.0 ** -k * d for m, d in zip(mats, dirs)]
        cur = alm.alm_mean(triple, *xs)
        if prev is not None:
            margin = min(margin, loewner_margin(prev, cur, 1e-9 * np.linalg.norm(cur, 2)))
        bound = max(metrics.thompson(x, m) for x, m in zip(xs, mats))
        margin = min(margin, bound - metrics.thompson(cur, target) + 1e-9)
        prev = cur
    return {"triple": triple, "matrices": mats, "directions": dirs}, margin


@register("alm.upward_continuity_geometric",
          "M for three geometric means is continuous along increasing sequences", trials=20)
def _(rng, dim):
    return _upward(rng, dim, (ka.geometric(),) * 3)


@register("alm.upward_continuity_general",
          "M for a general valid triple is continuous along increasing sequences (conjecture)",
          trials=20, asserted=False)
def _(rng, dim):
    return _upward(rng, dim, random_valid_triple(rng))


# -- axioms of the induced three-variable mean -------------------------------

@register("axiom.monotonicity", "M is monotone in each argument", trials=100)
def _(rng, dim):
    triple = random_valid_triple(rng)
    pairs = [ordered_pair(rng, dim) for _ in range(3)]
    lo = alm.alm_mean(triple, *(p[0] for p in pairs))
    hi = alm.alm_mean(triple, *(p[1] for p in pairs))
    return {"triple": triple, "pairs": pairs}, loewner_margin(lo, hi, 1e-9 * np.linalg.norm(hi, 2))


@register("axiom.transformer", "T M(A,B,C) T <= M(TAT, TBT, TCT) for PSD T", trials=100)
def _(rng, dim):
    triple = random_valid_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    t = random_transformer(rng, dim)
    lhs = t @ alm.alm_mean(triple, *mats) @ t
    rhs = alm.alm_mean(triple, *(t @ m @ t for m in mats), ADAPTIVE)
    return {"triple": triple, "matrices": mats, "t": t}, loewner_margin(lhs, rhs, 1e-8)


@register("axiom.congruence", "T M(A,B,C) T = M(TAT, TBT, TCT) for invertible T",
          trials=100)
def _(rng, dim):
    triple = random_valid_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    t = random_orthogonal(rng, dim) * np.exp(rng.uniform(-0.7, 0.7, dim))
    t = t @ random_orthogonal(rng, dim)
    lhs = t @ alm.alm_mean(triple, *mats) @ t.T
    rhs = alm.alm_mean(triple, *(t @ m @ t.T for m in mats))
    return {"triple": triple, "matrices": mats, "t": t}, 1e-8 - frob(lhs, rhs)


@register("axiom.normalization", "M(I, I, I) = I exactly, fast path and iterated",
          trials=100, dims=(1, 2, 3, 5, 8))
def _(rng, dim):
    if rng.random() < 0.25:
        triple = tuple(ka.arithmetic(random_weight(rng)) for _ in range(3))
    else:
        triple = random_valid_triple(rng)
    eye = np.eye(dim)
    ok = all(np.array_equal(alm.alm_mean(triple, eye, eye, eye, cfg), eye) for cfg in (FAST, ITER))
    return {"triple": triple}, 0.0 if ok else -1.0


@register("axiom.downward_continuity",
          "the regularization ladder gives Loewner-decreasing limits as the shift shrinks",
          trials=30)
def _(rng, dim):
    triple = random_valid_triple(rng)
    mats = [random_psd(rng, dim, rank=int(rng.integers(max(dim - 1, 1), dim + 1)))
            for _ in range(3)]
    mats[0] = random_psd(rng, dim, rank=max(dim - 1, 0)) if dim > 1 else np.zeros((1, 1))
    out = alm.alm_compute(triple, *mats)
    rungs = [m for _, m in out.ladder]
    if not rungs:
        return {"triple": triple, "matrices": mats}, -1.0
    margin = min((loewner_margin(b, a, 1e-12 * np.linalg.norm(a, 2))
                  for a, b in zip(rungs, rungs[1:])), default=0.0)
    return {"triple": triple, "matrices": mats}, margin


# -- closed-form oracles ----------------------------------------------------

@register("oracle.arithmetic",
          "arithmetic triples give p.(A,B,C): exactly on the fast path, to 1e-10 iterated",
          trials=100, dims=tuple(range(1, 9)))
def _(rng, dim):
    triple = tuple(ka.arithmetic(random_weight(rng)) for _ in range(3))
    mats = [random_spd(rng, dim) for _ in range(3)]
    p = stochastic.closed_form_p3(*(s.weight for s in triple))
    want = p[0] * mats[0] + p[1] * mats[1] + p[2] * mats[2]
    fast = alm.alm_compute(triple, *mats)
    it = alm.alm_compute(triple, *mats, ITER)
    spread = max(frob(m, it.limit) for m in it.members)
    exact = fast.stop_reason == alm.CLOSED_FORM and np.array_equal(fast.limit, want)
    margin = min(1e-10 - frob(it.limit, want), 1e-10 - spread, 1.0 if exact else -1.0)
    return {"triple": triple, "matrices": mats}, margin


@register("oracle.geometric_commuting",
          "geometric triples on commuting inputs give A^p1 B^p2 C^p3", trials=100,
          dims=tuple(range(1, 9)))
def _(rng, dim):
    triple = random_geometric_triple(rng)
    q, lams, mats = commuting_spd(rng, dim)
    p = stochastic.closed_form_p3(*(s.weight for s in triple))
    want = (q * np.prod([lam ** pk for lam, pk in zip(lams, p)], axis=0)) @ q.T
    return {"triple": triple, "matrices": mats}, 1e-8 - frob(alm.alm_mean(triple, *mats), want)


@register("oracle.harmonic",
          "harmonic triples give (p1 A^-1 + p2 B^-1 + p3 C^-1)^-1", trials=100,
          dims=tuple(range(1, 9)))
def _(rng, dim):
    triple = tuple(ka.harmonic(random_weight(rng)) for _ in range(3))
    mats = [random_spd(rng, dim) for _ in range(3)]
    p = stochastic.closed_form_p3(*(s.weight for s in triple))
    want = np.linalg.inv(sum(pk * np.linalg.inv(m) for pk, m in zip(p, mats)))
    margin = min(1e-8 - frob(alm.alm_mean(triple, *mats), want),
                 1e-8 - frob(alm.alm_mean(triple, *mats, ITER), want))
    return {"triple": triple, "matrices": mats}, margin


@register("oracle.joint_homogeneity",
          "M(aA, bB, cC) = a^p1 b^p2 c^p3 M(A,B,C) for geometric triples", trials=100)
def _(rng, dim):
    triple = random_geometric_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    scal = rng.uniform(0.1, 10.0, 3)
    p = stochastic.closed_form_p3(*(s.weight for s in triple))
    lhs = alm.alm_mean(triple, *(s * m for s, m in zip(scal, mats)))
    rhs = float(np.prod(scal ** p)) * alm.alm_mean(triple, *mats)
    return {"triple": triple, "matrices": mats, "scalars": scal}, 1e-8 - frob(lhs, rhs)


def adjoint_pair(rng):
    """A valid triple whose adjoint triple is valid as well."""
    kinds = list(rng.permutation(["arithmetic", "harmonic", "geometric"]))
    if rng.random() < 0.5:
        kinds = ["arithmetic"] * 3 if rng.random() < 0.5 else ["harmonic"] * 3
    triple = tuple(ka.make_mean(k, random_weight(rng)) for k in kinds)
    return triple, tuple(ka.adjoint(s) for s in triple)


@register("oracle.matrix_adjoint",
          "M built from adjoint means at inverted inputs is the inverse of M", trials=100,
          dims=(1, 2, 3, 4, 5, 6))
def _(rng, dim):
    triple, dual = adjoint_pair(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    lhs = alm.alm_mean(dual, *(np.linalg.inv(m) for m in mats), ITER)
    rhs = np.linalg.inv(alm.alm_mean(triple, *mats, ITER))
    return {"triple": triple, "matrices": mats}, 1e-7 * max(1.0, np.linalg.norm(rhs)) - frob(lhs, rhs)


@register("oracle.self_adjoint_geometric",
          "M for three geometric means commutes with inversion", trials=100,
          dims=(1, 2, 3, 4, 5, 6))
def _(rng, dim):
    triple = (ka.geometric(),) * 3
    mats = [random_spd(rng, dim) for _ in range(3)]
    back = np.linalg.inv(alm.alm_mean(triple, *(np.linalg.inv(m) for m in mats)))
    return {"matrices": mats}, 1e-7 - frob(back, alm.alm_mean(triple, *mats))


@register("oracle.self_adjoint_chain",
          "rescaling to lam A >= mu B >= C, then inverting, then undoing the scale "
          "reproduces the self-adjointness identity", trials=30, dims=(1, 2, 3, 4))
def _(rng, dim):
    g = (ka.geometric(),) * 3
    a, b, c = (random_spd(rng, dim) for _ in range(3))
    mu = metrics.relative_spectral_radius(b, c) * 1.01
    lam = mu * metrics.relative_spectral_radius(a, b) * 1.01
    sa, sb = lam * a, mu * b
    ordered = linalg.loewner_leq(sb, sa) and linalg.loewner_leq(c, sb)
    m_scaled = alm.alm_mean(g, sa, sb, c)
    m_inv = alm.alm_mean(g, np.linalg.inv(sa), np.linalg.inv(sb), np.linalg.inv(c))
    step1 = metrics.thompson(np.linalg.inv(m_scaled), m_inv)
    undo = (lam * mu) ** (-1 / 3)
    lhs = undo * np.linalg.inv(alm.alm_mean(g, a, b, c))
    rhs = undo * alm.alm_mean(g, np.linalg.inv(a), np.linalg.inv(b), np.linalg.inv(c))
    step2 = max(metrics.thompson(lhs, np.linalg.inv(m_scaled)), metrics.thompson(m_inv, rhs),
                metrics.thompson(lhs, rhs))
    margin = min(1e-7 - step1, 1e-7 - step2, 1.0 if ordered else -1.0)
    return {"matrices": [a, b, c], "lambda": lam, "mu": mu}, margin


def brute_force_tower_log(values, inner_tol=1e-15, outer_tol=1e-13):
    """Scalar tower of three-geometric ALM means, iterated in plain Python on logs.

    On positive scalars the weighted geometric mean is a weighted average of
    logarithms, so every stage is a loop of averages.
    """
    def inner(x, y, z):
        while max(x, y, z) - min(x, y, z) > inner_tol:
            x, y, z = (y + z) / 2, (z + x) / 2, (x + y) / 2
        return (x + y + z) / 3

    logs = [math.log(v) for v in values]
    m = len(logs)
    while max(logs) - min(logs) > outer_tol:
        logs = [inner(*(logs[(k + i) % m] for i in range(1, m))) for k in range(m)]
    return math.exp(sum(logs) / m)


@register("oracle.tower_geometric",
          "the 4-variable tower of geometric ALM means has weights 1/4 and gives 24^(1/4) "
          "on (1, 2, 3, 4)", trials=1)
def _(rng, dim):
    inner = alm.build_alm_multimean((ka.geometric(),) * 3)
    tower = alm.build_alm_n_multimean([inner] * 4)
    w = alm.estimate_weight_vector(tower)
    brute = brute_force_tower_log([1, 2, 3, 4])
    got = float(tower(*[np.array([[float(v)]]) for v in (1, 2, 3, 4)])[0, 0])
    margin = min(1e-6 - np.max(np.abs(w - 0.25)), 1e-6 - abs(got - 24 ** 0.25),
                 1e-12 - abs(brute - 24 ** 0.25), 1e-6 - abs(got - brute))
    return {"weights": w, "value": got, "brute_force": brute}, margin


# -- metrics ----------------------------------------------------------------

@register("metrics.exp_thompson_gauge", "exp(thompson) equals the gauge R", trials=100)
def _(rng, dim):
    a, b = random_spd(rng, dim), random_spd(rng, dim)
    r = metrics.gauge_R(a, b)
    return {"a": a, "b": b}, 1e-12 * r - abs(math.exp(metrics.thompson(a, b)) - r)


@register("metrics.thompson_congruence", "thompson is invariant under congruence",
          trials=100)
def _(rng, dim):
    a, b = random_spd(rng, dim), random_spd(rng, dim)
    s = random_spd(rng, dim, 0.3, 3.0)
    diff = abs(metrics.thompson(s @ a @ s, s @ b @ s) - metrics.thompson(a, b))
    return {"a": a, "b": b, "s": s}, 1e-10 - diff


@register("metrics.thompson_scaling",
          "thompson ignores common scaling and d(A, tA) = |log t|", trials=100)
def _(rng, dim):
    a, b = random_spd(rng, dim), random_spd(rng, dim)
    lam = float(np.exp(rng.uniform(-3, 3)))
    e1 = abs(metrics.thompson(lam * a, lam * b) - metrics.thompson(a, b))
    e2 = abs(metrics.thompson(a, lam * a) - abs(math.log(lam)))
    return {"a": a, "b": b, "lambda": lam}, 1e-10 - max(e1, e2)


@register("metrics.thompson_axioms",
          "thompson is symmetric, vanishes on the diagonal and obeys the triangle inequality",
          trials=100)
def _(rng, dim):
    a, b, c = (random_spd(rng, dim) for _ in range(3))
    d = metrics.thompson
    margin = min(1e-10 - abs(d(a, b) - d(b, a)), 1e-10 - d(a, a),
                 d(a, b) + d(b, c) - d(a, c) + 1e-10)
    return {"a": a, "b": b, "c": c}, margin


@register("metrics.geodesic_gauge_bound",
          "R(X #_r Y, X #_s Y) <= R(X, Y)^|r - s|", trials=200, dims=(1, 2, 3, 4))
def _(rng, dim):
    x, y = random_spd(rng, dim), random_spd(rng, dim)
    r, s = rng.uniform(0, 1, 2)
    lhs = metrics.gauge_R(ka.evaluate(ka.geometric(r), x, y), ka.evaluate(ka.geometric(s), x, y))
    rhs = metrics.gauge_R(x, y) ** abs(r - s)
    return {"x": x, "y": y, "r": r, "s": s}, rhs * (1 + 1e-10) - lhs


@register("metrics.lipschitz_geometric",
          "d(M(A,B,C), M(A',B',C')) <= p1 d(A,A') + p2 d(B,B') + p3 d(C,C') for "
          "geometric triples", trials=100)
def _(rng, dim):
    triple = random_geometric_triple(rng)
    mats = [random_spd(rng, dim) for _ in range(3)]
    other = [random_spd(rng, dim) for _ in range(3)]
    p = stochastic.closed_form_p3(*(s.weight for s in triple))
    bound = sum(pk * metrics.thompson(m, o) for pk, m, o in zip(p, mats, other))
    d = metrics.thompson(alm.alm_mean(triple, *mats), alm.alm_mean(triple, *other))
    return {"triple": triple, "matrices": mats, "other": other}, bound - d + 1e-8


@register("metrics.distance_bound",
          "geometric triples sharing p lie within K (p1 d(B,C) + p2 d(C,A) + p3 d(A,B))",
          trials=100)
def _(rng, dim):
    if rng.random() < 0.5:
        r, s = 0.5, 2 / 3
    else:
        r, s = rng.uniform(0.05, 0.95, 2)
    t1, t2 = (ka.geometric(r),) * 3, (ka.geometric(s),) * 3
    a, b, c = (random_spd(rng, dim) for _ in range(3))
    p = stochastic.closed_form_p3(r, r, r)
    d = metrics.thompson
    bound = abs(r - s) * (p[0] * d(b, c) + p[1] * d(c, a) + p[2] * d(a, b))
    got = d(alm.alm_mean(t1, a, b, c), alm.alm_mean(t2, a, b, c))
    return {"r": r, "s": s, "matrices": [a, b, c]}, bound - got + 1e-8


# -- meta -------------------------------------------------------------------

INVARIANTS = (
    ("linalg", "identity spectral function is the identity", "linalg.identity_function"),
    ("linalg", "square root squared recovers A", "linalg.sqrt_squared"),
    ("linalg", "congruence by S and S^-1 cancel", "linalg.congruence_inverse"),
    ("linalg", "Loewner order is a partial order", "linalg.loewner_partial_order"),
    ("kubo_ando", "monotonicity", "kubo_ando.monotonicity"),
    ("kubo_ando", "transformer inequality", "kubo_ando.transformer_inequality"),
    ("kubo_ando", "strict concavity of non-arithmetic means", "kubo_ando.strict_concavity"),
    ("kubo_ando", "adjoint is an involution", "kubo_ando.adjoint_involution"),
    ("kubo_ando", "transpose is an involution", "kubo_ando.transpose_involution"),
    ("kubo_ando", "commuting inputs reduce to scalars", "kubo_ando.commuting_diagonal"),
    ("kubo_ando", "quadratic forms bound the mean", "kubo_ando.scalar_transfer"),
    ("stochastic", "powers of primitive matrices converge", "stochastic.power_convergence"),
    ("stochastic", "closed-form p equals Perron vector", "stochastic.closed_form_vs_eigen"),
    ("stochastic", "cyclic relabeling symmetry", "stochastic.cyclic_relabeling"),
    ("stochastic", "non-primitive powers are not Cauchy", "stochastic.nonprimitive_not_cauchy"),
    ("alm", "monotone aggregate", "alm.s_monotone"),
    ("alm", "common limit", "alm.common_limit"),
    ("alm", "axiom I monotonicity", "axiom.monotonicity"),
    ("alm", "axiom II transformer inequality", "axiom.transformer"),
    ("alm", "axiom II' congruence invariance", "axiom.congruence"),
    ("alm", "axiom III downward continuity", "axiom.downward_continuity"),
    ("alm", "axiom IV normalization", "axiom.normalization"),
    ("alm", "sandwich", "alm.sandwich"),
    ("alm", "mean-order monotonicity", "alm.mean_order"),
    ("alm", "norm perturbation", "alm.norm_perturbation"),
    ("alm", "scalar strict concavity", "alm.scalar_strict_concavity"),
    ("metrics", "exp of thompson is the gauge", "metrics.exp_thompson_gauge"),
    ("metrics", "thompson congruence invariance", "metrics.thompson_congruence"),
    ("metrics", "thompson scaling", "metrics.thompson_scaling"),
    ("metrics", "thompson metric axioms", "metrics.thompson_axioms"),
    ("metrics", "Lipschitz bound for geometric triples", "metrics.lipschitz_geometric"),
    ("metrics", "triple-vs-triple distance bound", "metrics.distance_bound"),
    ("verify", "self-adjointness chain", "oracle.self_adjoint_chain"),
)


@register("meta.registry_complete",
          "every listed invariant maps to exactly one registered check", trials=1)
def _(rng, dim):
    missing = [name for _, _, name in INVARIANTS if name not in REGISTRY]
    keys = [(mod, text) for mod, text, _ in INVARIANTS]
    dupes = len(keys) != len(set(keys))
    return {"missing": missing}, -1.0 if missing or dupes else 1.0
