"""
Dense symmetric linear algebra on the positive semidefinite cone.

Everything here works on plain ``numpy`` arrays of dtype float64.  The
eigensolver is LAPACK's symmetric driver (``numpy.linalg.eigh``); on top of
it we fix a deterministic eigenvector sign so downstream results are
reproducible run to run.
"""
from __future__ import annotations

from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainError, EigenFailure

#: relative Frobenius asymmetry above which an input is rejected
ASYMMETRY_RTOL = 1e-8
#: smallest/largest eigenvalue ratio below which a matrix is only semidefinite
DEFINITE_RTOL = 1e-12
#: constant ``c`` in the reconstruction bound ``dim * eps * ||A||_F * c``
RECONSTRUCTION_C = 64.0

_EPS = np.finfo(float).eps


class SpectralDecomposition(NamedTuple):
    """Eigenpairs of a symmetric matrix, eigenvalues ascending.

    ``eigenvectors[:, i]`` belongs to ``eigenvalues[i]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self, values=None):
        q = self.eigenvectors
        lam = self.eigenvalues if values is None else values
        return symmetrize((q * lam) @ q.T, check=False)


def as_square(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    return a


def asymmetry(a) -> float:
    """Relative Frobenius norm of the antisymmetric part."""
    a = as_square(a)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(a - a.T) / scale)


def symmetrize(a, check: bool = True) -> np.ndarray:
    """Return ``(a + a.T) / 2``.

    With ``check`` the input is rejected when its relative asymmetry exceeds
    :data:`ASYMMETRY_RTOL`.
    """
    a = as_square(a)
    if check:
        asym = asymmetry(a)
        if asym > ASYMMETRY_RTOL:
            raise DomainError(f"matrix is not symmetric (relative asymmetry {asym:.3e})")
    return 0.5 * (a + a.T)


def _fix_signs(q):
    # first entry of each eigenvector that is clearly nonzero is made positive
    lead = np.argmax(np.abs(q) > 1e-10, axis=0)
    signs = np.sign(q[lead, np.arange(q.shape[1])])
    signs[signs == 0] = 1.0
    return q * signs


def spectral_decompose(a) -> SpectralDecomposition:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues come back in ascending order and each eigenvector has its
    first nonzero component positive.

    Raises
    ------
    EigenFailure
        If LAPACK reports non-convergence (its internal QR/divide-and-conquer
        iteration cap was exhausted).
    """
    a = symmetrize(a)
    try:
        lam, q = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenFailure(str(exc)) from exc
    return SpectralDecomposition(lam, _fix_signs(q))


def reconstruction_bound(a) -> float:
    a = as_square(a)
    return a.shape[0] * _EPS * max(np.linalg.norm(a), 1.0) * RECONSTRUCTION_C


def _psd_threshold(lam) -> float:
    return DEFINITE_RTOL * max(float(np.max(np.abs(lam))), np.finfo(float).tiny)


def apply_spectral_function(
    a,
    f: Callable,
    f0: float | None = None,
    decomposition: SpectralDecomposition | None = None,
) -> np.ndarray:
    """Evaluate ``Q f(L) Q^T`` for ``a = Q L Q^T`` positive semidefinite.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric positive semidefinite matrix.
    f : callable
        Scalar function on ``(0, inf)``; applied to an array of eigenvalues,
        so it should be numpy-vectorized.
    f0 : float, optional
        Value used at zero eigenvalues (the right limit of ``f`` at 0).  When
        omitted ``f(0.0)`` is evaluated.
    decomposition : SpectralDecomposition, optional
        Precomputed decomposition of ``a``.

    Raises
    ------
    DomainError
        If ``a`` has a clearly negative eigenvalue or ``f`` is not finite at
        some eigenvalue.
    """
    dec = spectral_decompose(a) if decomposition is None else decomposition
    lam = dec.eigenvalues
    tol = _psd_threshold(lam)
    if lam[0] < -tol:
        raise DomainError(f"matrix is not positive semidefinite (eigenvalue {lam[0]:.3e})")
    positive = lam > 0
    values = np.empty_like(lam)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        if positive.any():
            values[positive] = _vectorized(f, lam[positive])
        if not positive.all():
            values[~positive] = f(0.0) if f0 is None else f0
    if not np.all(np.isfinite(values)):
        raise DomainError("function is undefined at an eigenvalue of the matrix")
    return dec.reconstruct(values)


def _vectorized(f, x):
    out = np.asarray(f(x), dtype=float)
    if out.shape != x.shape:
        out = np.array([f(float(t)) for t in x], dtype=float)
    return out


def sqrtm(a):
    return apply_spectral_function(a, np.sqrt, 0.0)


def inv_sqrtm(a):
    return apply_spectral_function(a, lambda t: t ** -0.5)


def powm(a, r: float):
    """Real power of a positive semidefinite matrix."""
    return apply_spectral_function(a, lambda t: t ** r, 0.0 if r > 0 else None)


def logm(a):
    return apply_spectral_function(a, np.log)


def expm(h):
    """Exponential of a symmetric matrix (no definiteness requirement)."""
    dec = spectral_decompose(h)
    return dec.reconstruct(np.exp(dec.eigenvalues))


def inv(a):
    """Inverse of a positive definite matrix through its eigendecomposition."""
    return apply_spectral_function(a, lambda t: 1.0 / t)


def congruence(s, a) -> np.ndarray:
    """``S A S`` for symmetric ``S``, symmetrized."""
    s = as_square(s)
    a = as_square(a)
    if s.shape != a.shape:
        raise DomainError(f"dimension mismatch {s.shape} vs {a.shape}")
    return symmetrize(s @ a @ s, check=False)


def min_eig(a) -> float:
    return float(np.linalg.eigvalsh(symmetrize(a, check=False))[0])


def loewner_leq(a, b, slack: float = 0.0) -> bool:
    """True iff ``a <= b`` in Loewner order, i.e. ``min eig(b - a) >= -slack``."""
    a = as_square(a)
    b = as_square(b)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch {a.shape} vs {b.shape}")
    return min_eig(b - a) >= -slack


def definiteness(a) -> str:
    """Classify as ``'definite'``, ``'semidefinite'`` or ``'indefinite'``."""
    lam = np.linalg.eigvalsh(symmetrize(a))
    tol = _psd_threshold(lam)
    if lam[0] > tol:
        return "definite"
    if lam[0] >= -tol:
        return "semidefinite"
    return "indefinite"


def is_positive_definite(a) -> bool:
    return definiteness(a) == "definite"


class SpdMatrix:
    """Immutable symmetric positive (semi)definite matrix.

    The input is symmetrized on construction; the eigendecomposition is
    computed lazily and cached.

    >>> SpdMatrix([[2.0, 1.0], [1.0, 2.0]]).decomposition.eigenvalues
    array([1., 3.])
    """

    def __init__(self, data):
        raw = as_square(data)
        self.asymmetry = asymmetry(raw)
        entries = symmetrize(raw)
        entries.setflags(write=False)
        self.entries = entries
        if self.definiteness == "indefinite":
            raise DomainError("matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @cached_property
    def decomposition(self) -> SpectralDecomposition:
        return spectral_decompose(self.entries)

    @cached_property
    def definiteness(self) -> str:
        lam = self.decomposition.eigenvalues
        tol = _psd_threshold(lam)
        if lam[0] > tol:
            return "definite"
        return "semidefinite" if lam[0] >= -tol else "indefinite"

    @property
    def is_definite(self) -> bool:
        return self.definiteness == "definite"

    def __array__(self, dtype=None, copy=None):
        out = np.array(self.entries, dtype=dtype)
        return out

    def __repr__(self):
        return f"SpdMatrix(dim={self.dim}, {self.definiteness})"
