"""
Two-variable operator means in the Kubo-Ando sense.

A mean ``sigma`` is represented by its normalized operator monotone function
``f`` on ``(0, inf)``; on matrices

    A sigma B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}.

Built-in families are the weighted arithmetic, geometric and harmonic means
together with the trivial projections ``left`` (A l B = A) and ``right``
(A r B = B).  Custom means can be wrapped with :func:`custom_mean`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import linalg
from .errors import (
    DomainError,
    InconsistentMean,
    ParameterError,
    SingularInput,
    Unsupported,
)

BUILTIN_KINDS = ("arithmetic", "geometric", "harmonic")
TRIVIAL_KINDS = ("left", "right")

#: log-spaced grid used for all pointwise comparisons of representing functions
GRID = np.logspace(-4.0, 4.0, 64)
GRID_RTOL = 1e-12
FD_STEP = 1e-6
WEIGHT_TOL = 1e-6
_ZERO_PROBE = 1e-14


@dataclass(frozen=True, eq=False)
class TwoVarMean:
    """A two-variable operator mean.

    Attributes
    ----------
    kind : str
        One of ``arithmetic``, ``geometric``, ``harmonic``, ``left``,
        ``right`` or ``custom``.
    r : float or None
        Parameter of the built-in families (``None`` for custom means).
    f : callable
        Representing function, numpy-vectorized.
    weight : float
        ``f'(1)``; 0 for ``left`` and 1 for ``right``.
    f0 : float
        Right limit of ``f`` at 0, used on singular arguments.
    is_arithmetic : bool
    name : str
    """

    kind: str
    r: float | None
    f: Callable = field(repr=False)
    weight: float
    f0: float
    is_arithmetic: bool
    name: str = ""

    @property
    def is_trivial(self) -> bool:
        return self.kind in TRIVIAL_KINDS

    @property
    def is_symmetric(self) -> bool:
        return functions_agree(self.f, transpose(self).f)

    def __call__(self, a, b, eps: float = 0.0):
        return evaluate(self, a, b, eps)

    def __str__(self):
        return self.name or self.kind


def functions_agree(f, g, grid=GRID, rtol: float = GRID_RTOL) -> bool:
    """Pointwise agreement of two representing functions on ``grid``."""
    fv = linalg._vectorized(f, grid)
    gv = linalg._vectorized(g, grid)
    return bool(np.all(np.abs(fv - gv) <= rtol * np.maximum(1.0, np.abs(fv))))


def same_mean(s1: TwoVarMean, s2: TwoVarMean) -> bool:
    """Means are equal iff their representing functions agree."""
    return functions_agree(s1.f, s2.f)


def mean_leq(s1: TwoVarMean, s2: TwoVarMean, grid=GRID) -> bool:
    """``s1 <= s2`` pointwise on the grid (the order of representing functions)."""
    f1 = linalg._vectorized(s1.f, grid)
    f2 = linalg._vectorized(s2.f, grid)
    return bool(np.all(f1 <= f2 + GRID_RTOL * np.maximum(1.0, np.abs(f2))))


def _left():
    return TwoVarMean("left", None, lambda t: np.ones_like(np.asarray(t, dtype=float)),
                      0.0, 1.0, False, "l")


def _right():
    return TwoVarMean("right", None, lambda t: np.asarray(t, dtype=float) * 1.0,
                      1.0, 0.0, False, "r")


def make_mean(kind: str, r: float | None = None) -> TwoVarMean:
    """Construct a built-in mean.

    ``r`` must lie in ``[0, 1]``; the endpoints collapse every family onto
    the trivial means (``r = 0`` gives ``left``, ``r = 1`` gives ``right``).

    Examples
    --------
    >>> g = make_mean("geometric", 0.5)
    >>> float(g.f(4.0)), g.weight
    (2.0, 0.5)
    """
    if kind in TRIVIAL_KINDS:
        return _left() if kind == "left" else _right()
    if kind not in BUILTIN_KINDS:
        raise ParameterError(f"unknown mean kind {kind!r}")
    if r is None:
        raise ParameterError(f"{kind} mean requires a parameter r")
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"mean parameter r={r} outside [0, 1]")
    if r == 0.0:
        return _left()
    if r == 1.0:
        return _right()
    if kind == "arithmetic":
        return TwoVarMean(kind, r, lambda t: (1.0 - r) + r * np.asarray(t, dtype=float),
                          r, 1.0 - r, True, f"nabla_{r:g}")
    if kind == "geometric":
        return TwoVarMean(kind, r, lambda t: np.asarray(t, dtype=float) ** r,
                          r, 0.0, False, f"#_{r:g}")
    return TwoVarMean(kind, r, lambda t: _harmonic(t, r), r, 0.0, False, f"!_{r:g}")


def _harmonic(t, r):
    t = np.asarray(t, dtype=float)
    return t / (r + (1.0 - r) * t)


def arithmetic(r: float = 0.5) -> TwoVarMean:
    return make_mean("arithmetic", r)


def geometric(r: float = 0.5) -> TwoVarMean:
    return make_mean("geometric", r)


def harmonic(r: float = 0.5) -> TwoVarMean:
    return make_mean("harmonic", r)


def custom_mean(f: Callable, weight: float, is_arithmetic: bool = False,
                name: str = "custom", f0: float | None = None) -> TwoVarMean:
    """Wrap a user-supplied representing function.

    Operator monotonicity cannot be verified; we only check on :data:`GRID`
    that ``f(1) = 1`` and that ``f`` is nondecreasing and midpoint concave.
    """
    fv = linalg._vectorized(f, GRID)
    if abs(float(linalg._vectorized(f, np.array([1.0]))[0]) - 1.0) > 1e-12:
        raise ParameterError("representing function must satisfy f(1) = 1")
    if np.any(np.diff(fv) < -GRID_RTOL * np.abs(fv[1:])):
        raise ParameterError("representing function is not nondecreasing on the grid")
    mid = linalg._vectorized(f, 0.5 * (GRID[1:] + GRID[:-1]))
    if np.any(mid < 0.5 * (fv[1:] + fv[:-1]) - 1e-10 * np.maximum(1.0, mid)):
        raise ParameterError("representing function is not concave on the grid")
    if not 0.0 < weight < 1.0:
        raise ParameterError("custom means must be non-trivial, weight in (0, 1)")
    if f0 is None:
        f0 = float(linalg._vectorized(f, np.array([_ZERO_PROBE]))[0])
    return TwoVarMean("custom", None, f, float(weight), float(f0), bool(is_arithmetic), name)


def transpose(sigma: TwoVarMean) -> TwoVarMean:
    """Mean with representing function ``t f(1/t)``, i.e. ``A s' B = B s A``."""
    if sigma.kind == "left":
        return _right()
    if sigma.kind == "right":
        return _left()
    if sigma.kind in BUILTIN_KINDS:
        return make_mean(sigma.kind, 1.0 - sigma.r)
    f = sigma.f

    def ft(t):
        t = np.asarray(t, dtype=float)
        return t * linalg._vectorized(f, 1.0 / t)

    return custom_mean(ft, 1.0 - sigma.weight, sigma.is_arithmetic, f"{sigma.name}'")


def adjoint(sigma: TwoVarMean) -> TwoVarMean:
    """Mean with representing function ``1 / f(1/t)``.

    Satisfies ``adjoint(s)(A^-1, B^-1) = s(A, B)^-1`` on definite inputs.
    """
    if sigma.is_trivial:
        raise Unsupported("adjoint of a trivial mean is not supported")
    if sigma.kind == "arithmetic":
        return make_mean("harmonic", sigma.r)
    if sigma.kind == "harmonic":
        return make_mean("arithmetic", sigma.r)
    if sigma.kind == "geometric":
        return make_mean("geometric", sigma.r)
    f = sigma.f

    def fa(t):
        t = np.asarray(t, dtype=float)
        return 1.0 / linalg._vectorized(f, 1.0 / t)

    return custom_mean(fa, sigma.weight, sigma.is_arithmetic, f"{sigma.name}*")


def weight_of(sigma: TwoVarMean) -> float:
    """Central finite difference of ``f`` at 1.

    Raises
    ------
    Unsupported
        For trivial means.
    InconsistentMean
        If the estimate differs from ``sigma.weight`` by more than 1e-6.
    """
    if sigma.is_trivial:
        raise Unsupported("trivial means have no weight in (0, 1)")
    h = FD_STEP
    vals = linalg._vectorized(sigma.f, np.array([1.0 - h, 1.0 + h]))
    est = float((vals[1] - vals[0]) / (2.0 * h))
    if abs(est - sigma.weight) > WEIGHT_TOL:
        raise InconsistentMean(
            f"declared weight {sigma.weight} but f'(1) is approximately {est}")
    return est


def evaluate(sigma: TwoVarMean, a, b, eps: float = 0.0) -> np.ndarray:
    """Matrix mean ``(A + eps I) sigma (B + eps I)``.

    Parameters
    ----------
    sigma : TwoVarMean
    a, b : (n, n) array_like
        Positive semidefinite matrices.
    eps : float
        Regularization shift added to both arguments.

    Raises
    ------
    SingularInput
        If ``A + eps I`` is singular and the mean needs an invertible first
        argument (every non-arithmetic, non-trivial mean does).
    """
    a = linalg.symmetrize(a)
    b = linalg.symmetrize(b)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch {a.shape} vs {b.shape}")
    if eps:
        shift = eps * np.eye(a.shape[0])
        a = a + shift
        b = b + shift
    if sigma.kind == "left":
        return a
    if sigma.kind == "right":
        return b
    if sigma.is_arithmetic and sigma.kind == "arithmetic":
        return (1.0 - sigma.r) * a + sigma.r * b
    lam = np.linalg.eigvalsh(a)
    if lam[0] <= linalg.DEFINITE_RTOL * max(abs(lam[-1]), np.finfo(float).tiny):
        raise SingularInput("first argument is singular; pass eps > 0 to regularize")
    return _balanced(sigma, a, b)


def _balanced(sigma: TwoVarMean, a, b):
    # Congruence by G^{-1/2}, G = (A + B) / 2, turns the pair into (A', 2I - A'),
    # which commute, so the mean is the scalar map t -> t f((2 - t) / t) on A'.
    # Unlike forming A^{-1/2} B A^{-1/2}, nothing here blows up when A and B
    # are both nearly singular along different directions.
    dec = linalg.spectral_decompose(0.5 * (a + b))
    lam = np.maximum(dec.eigenvalues, 0.0)
    half = dec.reconstruct(np.sqrt(lam))
    ihalf = dec.reconstruct(np.where(lam > 0, 1.0 / np.sqrt(np.where(lam > 0, lam, 1.0)), 0.0))
    a1 = linalg.symmetrize(ihalf @ a @ ihalf, check=False)
    at_zero = 2.0 * transpose(sigma).f0

    def on_segment(t):
        t = np.asarray(t, dtype=float)
        u = np.maximum(2.0 - t, 0.0) / t
        fu = linalg._vectorized(sigma.f, np.where(u > 0, u, 1.0))
        return np.where(u > 0, t * fu, t * sigma.f0)

    h = linalg.apply_spectral_function(a1, on_segment, at_zero)
    return linalg.symmetrize(half @ h @ half, check=False)


def scalar_mean(sigma: TwoVarMean, a: float, b: float) -> float:
    """``a sigma b`` for nonnegative scalars, including the boundary ``a = 0``."""
    if a < 0 or b < 0:
        raise DomainError("scalar means need nonnegative arguments")
    if sigma.kind == "left":
        return float(a)
    if sigma.kind == "right":
        return float(b)
    if a == 0.0:
        return float(b) * transpose(sigma).f0
    return float(a) * float(linalg._vectorized(sigma.f, np.array([b / a]))[0])


def scalar_mean_inequality_check(sigma: TwoVarMean, a, b, x, slack: float = 1e-10) -> bool:
    """``<(A sigma B) x, x> <= <A x, x> sigma <B x, x>`` up to ``slack``.

    ``slack`` is relative to ``max(1, rhs)``.
    """
    x = np.asarray(x, dtype=float).ravel()
    if not np.linalg.norm(x) > 0:
        raise DomainError("probe vector must be nonzero")
    a = linalg.symmetrize(a)
    b = linalg.symmetrize(b)
    lhs = float(x @ evaluate(sigma, a, b) @ x)
    rhs = scalar_mean(sigma, max(float(x @ a @ x), 0.0), max(float(x @ b @ x), 0.0))
    return lhs <= rhs + slack * max(1.0, abs(rhs))


def mean_to_dict(sigma: TwoVarMean) -> dict:
    if sigma.is_trivial:
        return {"kind": sigma.kind}
    if sigma.kind not in BUILTIN_KINDS:
        raise Unsupported("custom means are not serializable")
    return {"kind": sigma.kind, "r": sigma.r}


def mean_from_dict(obj: dict) -> TwoVarMean:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ParameterError(f"mean descriptor must be an object with a 'kind': {obj!r}")
    return make_mean(obj["kind"], obj.get("r"))
