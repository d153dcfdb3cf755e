"""
Weight matrices of ALM recursions and their Perron vectors.

Row ``k`` of the weight matrix ``gamma`` holds the weights with which the
``k``-th sequence member of the next step draws on the current members; its
left Perron vector ``p`` (``p @ gamma = p``) gives the coefficients of the
monotone aggregate ``sum_k p_k A^(k)_m``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePerron, NonPrimitive, NotAffinelyDominated, ParameterError

ROW_SUM_TOL = 1e-12
UNIT_MODULUS_TOL = 1e-10
POWER_TOL = 1e-14
POWER_MAXITER = 1_000_000


@dataclass(frozen=True)
class StochasticProfile:
    """Weight matrix with its Perron vector and primitivity verdict."""

    gamma: np.ndarray
    p: np.ndarray
    primitive: bool
    spectral_gap: float

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma.tolist(),
            "p": self.p.tolist(),
            "primitive": bool(self.primitive),
            "spectral_gap": float(self.spectral_gap),
        }


def _check_open_unit(*rs):
    for i, r in enumerate(rs, start=1):
        if not 0.0 < r < 1.0:
            raise ParameterError(f"weight r{i}={r} must lie in (0, 1)")


def _check_stochastic(gamma):
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise ParameterError(f"expected a square matrix, got shape {gamma.shape}")
    if np.any(gamma < 0):
        raise ParameterError("stochastic matrix has a negative entry")
    if np.any(np.abs(gamma.sum(axis=1) - 1.0) > 1e-10):
        raise ParameterError("rows of a stochastic matrix must sum to 1")
    return gamma


def closed_form_p3(r1: float, r2: float, r3: float) -> np.ndarray:
    """Perron vector of the 3x3 weight matrix in closed form.

    >>> closed_form_p3(0.5, 1/3, 0.25) * 11
    array([4., 3., 4.])
    """
    _check_open_unit(r1, r2, r3)
    num = np.array([
        (1.0 - r3) + r2 * r3,
        (1.0 - r1) + r3 * r1,
        (1.0 - r2) + r1 * r2,
    ])
    return num / num.sum()


def gamma3(r1: float, r2: float, r3: float) -> np.ndarray:
    return np.array([
        [0.0, 1.0 - r1, r1],
        [r2, 0.0, 1.0 - r2],
        [1.0 - r3, r3, 0.0],
    ])


def gamma_from_weights_3(r1: float, r2: float, r3: float) -> StochasticProfile:
    """Profile of the three-variable recursion driven by means of weights r1, r2, r3.

    ``p`` is taken from the closed form (it agrees with :func:`perron_vector`
    to 1e-12 and keeps the three-variable and ``n = 2`` engines identical).
    """
    _check_open_unit(r1, r2, r3)
    gamma = gamma3(r1, r2, r3)
    _, gap = check_primitive(gamma)
    return StochasticProfile(gamma, closed_form_p3(r1, r2, r3), True, gap)


def cyclic_gamma(weight_vectors) -> np.ndarray:
    """``gamma[k, (k + i) mod (n+1)] = w[k][i-1]`` for ``i = 1..n``."""
    w = np.asarray(weight_vectors, dtype=float)
    m, n = w.shape
    if m != n + 1:
        raise ParameterError(f"need n+1 weight vectors of length n, got {m} of length {n}")
    gamma = np.zeros((m, m))
    for k in range(m):
        for i in range(1, m):
            gamma[k, (k + i) % m] = w[k, i - 1]
    return gamma


def gamma_from_multimeans(weight_vectors, unsafe: bool = False) -> StochasticProfile:
    """Profile of the ``(n+1)``-variable recursion built from ``n``-variable means.

    Parameters
    ----------
    weight_vectors : (n+1, n) array_like
        Row ``k`` is the dominating probability vector of the ``k``-th mean.
    unsafe : bool
        Skip the domination and primitivity checks (exploratory runs).

    Raises
    ------
    NotAffinelyDominated
        If some weight is not strictly positive.
    NonPrimitive
        If ``gamma ** m`` does not converge.
    """
    w = np.asarray(weight_vectors, dtype=float)
    if w.ndim != 2:
        raise ParameterError("weight vectors must form a 2-D array")
    if np.any(np.abs(w.sum(axis=1) - 1.0) > 1e-10):
        raise ParameterError("each weight vector must sum to 1")
    bad = [k for k in range(w.shape[0]) if np.any(w[k] <= 0.0)]
    if bad and not unsafe:
        raise NotAffinelyDominated(
            f"means {bad} are not affinely dominated (a weight is not strictly positive)")
    if w.shape == (3, 2) and not bad:
        return gamma_from_weights_3(w[0, 1], w[1, 1], w[2, 1])
    gamma = cyclic_gamma(w)
    primitive, gap = check_primitive(gamma)
    if not primitive and not unsafe:
        raise NonPrimitive("weight matrix is not primitive; its powers do not converge")
    return StochasticProfile(gamma, perron_vector(gamma), primitive, gap)


def perron_vector(gamma) -> np.ndarray:
    """Left eigenvector of ``gamma`` for eigenvalue 1, normalized to sum 1.

    Solves ``(gamma^T - I) p = 0`` with the normalization row appended; if
    the least-squares residual is poor, falls back to power iteration on the
    lazy chain ``(I + gamma^T) / 2`` (same fixed point, no periodicity).

    Raises
    ------
    DegeneratePerron
        If the eigenvalue-1 eigenspace has dimension greater than one.
    """
    gamma = _check_stochastic(gamma)
    m = gamma.shape[0]
    sv = np.linalg.svd(gamma.T - np.eye(m), compute_uv=False)
    nullity = int(np.sum(sv <= 1e-10 * max(1.0, sv[0])))
    if nullity > 1:
        raise DegeneratePerron(f"eigenvalue 1 has a {nullity}-dimensional eigenspace")
    system = np.vstack([gamma.T - np.eye(m), np.ones((1, m))])
    rhs = np.zeros(m + 1)
    rhs[-1] = 1.0
    p, *_ = np.linalg.lstsq(system, rhs, rcond=None)
    if np.linalg.norm(p @ gamma - p, np.inf) > 1e-12 or np.any(p < -1e-12):
        p = _power_iteration(gamma)
    p = np.clip(p, 0.0, None)
    return p / p.sum()


def _power_iteration(gamma):
    lazy = 0.5 * (np.eye(gamma.shape[0]) + gamma)
    p = np.full(gamma.shape[0], 1.0 / gamma.shape[0])
    for _ in range(POWER_MAXITER):
        nxt = p @ lazy
        if np.max(np.abs(nxt - p)) < POWER_TOL:
            return nxt
        p = nxt
    return p


def check_primitive(gamma) -> tuple[bool, float]:
    """Primitivity verdict and spectral gap of a row-stochastic matrix.

    Primitive means exactly one eigenvalue on the unit circle (within 1e-10).
    Matrices of size at least 3 with zero diagonal and strictly positive
    off-diagonal entries are certified primitive without the eigenvalue test
    (for size 2 the only such matrix is the swap, which is periodic).

    Returns
    -------
    primitive : bool
    spectral_gap : float
        ``1 -`` the largest modulus among the eigenvalues other than 1.
    """
    gamma = _check_stochastic(gamma)
    m = gamma.shape[0]
    if m == 1:
        return True, 1.0
    mod = np.sort(np.abs(np.linalg.eigvals(gamma)))[::-1]
    gap = float(max(0.0, 1.0 - mod[1]))
    off = gamma[~np.eye(m, dtype=bool)]
    if m >= 3 and np.all(np.diag(gamma) == 0.0) and np.all(off > 0.0):
        return True, gap
    unit = int(np.sum(mod >= 1.0 - UNIT_MODULUS_TOL))
    return unit == 1, gap


def profile(gamma) -> StochasticProfile:
    """Profile of an arbitrary row-stochastic matrix (no hypothesis checks)."""
    gamma = _check_stochastic(gamma)
    primitive, gap = check_primitive(gamma)
    return StochasticProfile(gamma, perron_vector(gamma), primitive, gap)


def cyclic_shift(m: int) -> np.ndarray:
    """Cyclic shift ``e_k -> e_{k+1 mod m}`` as a row-stochastic matrix."""
    return np.roll(np.eye(m), 1, axis=1)


def cyclic_averaging_gamma() -> np.ndarray:
    """The 6x6 periodic matrix ``shift(3) kron [[1/2, 1/2], [1/2, 1/2]]``."""
    return np.kron(cyclic_shift(3), np.full((2, 2), 0.5))
