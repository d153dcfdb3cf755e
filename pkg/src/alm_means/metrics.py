"""
Thompson metric and related gauges on the positive definite cone.

``thompson(A, B) = || log(A^{-1/2} B A^{-1/2}) ||`` (operator norm), which
equals ``log R(A, B)`` with ``R(A, B) = max(rho(A^-1 B), rho(A B^-1))``.
"""
from __future__ import annotations

import numpy as np

from . import linalg
from .errors import DomainError
from .kubo_ando import evaluate, geometric


def _relative_spectrum(a, b):
    """Eigenvalues of ``A^-1 B`` via the symmetric form ``A^{-1/2} B A^{-1/2}``."""
    a = linalg.symmetrize(a)
    b = linalg.symmetrize(b)
    if a.shape != b.shape:
        raise DomainError(f"dimension mismatch {a.shape} vs {b.shape}")
    for m in (a, b):
        if not linalg.is_positive_definite(m):
            raise DomainError("Thompson metric needs positive definite arguments")
    ih = linalg.inv_sqrtm(a)
    return np.linalg.eigvalsh(linalg.symmetrize(ih @ b @ ih, check=False))


def thompson(a, b) -> float:
    """Thompson distance between two positive definite matrices.

    Raises
    ------
    DomainError
        If either argument is not positive definite.
    """
    lam = _relative_spectrum(a, b)
    return float(max(abs(np.log(lam[0])), abs(np.log(lam[-1]))))


def max_pairwise_thompson(mats) -> float:
    """Largest Thompson distance over all pairs, one decomposition per member."""
    mats = [linalg.symmetrize(m) for m in mats]
    if len({m.shape for m in mats}) > 1:
        raise DomainError("dimension mismatch among members")
    ihalves = []
    for m in mats:
        lam, q = np.linalg.eigh(m)
        if not lam[0] > linalg.DEFINITE_RTOL * max(abs(lam[-1]), np.finfo(float).tiny):
            raise DomainError("Thompson metric needs positive definite arguments")
        ihalves.append((q / np.sqrt(lam)) @ q.T)
    best = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            ih = ihalves[i]
            lam = np.linalg.eigvalsh(linalg.symmetrize(ih @ mats[j] @ ih, check=False))
            if lam[0] <= 0.0:
                # members so far apart that round-off swallowed the smaller one
                return float("inf")
            best = max(best, abs(np.log(lam[0])), abs(np.log(lam[-1])))
    return float(best)


def spectral_radius(x) -> float:
    """Largest eigenvalue modulus of a square matrix."""
    x = linalg.as_square(x)
    return float(np.max(np.abs(np.linalg.eigvals(x))))


def relative_spectral_radius(a, b) -> float:
    """``rho(A^-1 B)`` for positive definite ``A``, ``B``."""
    return float(_relative_spectrum(a, b)[-1])


def gauge_R(x, y) -> float:
    """``max(rho(X^-1 Y), rho(X Y^-1))``; equals ``exp(thompson(X, Y))``."""
    lam = _relative_spectrum(x, y)
    return float(max(lam[-1], 1.0 / lam[0]))


def geodesic_gauge_bound_check(x, y, r: float, s: float, rtol: float = 1e-10) -> bool:
    """Check ``R(X #_r Y, X #_s Y) <= R(X, Y) ** |r - s|`` with slack ``1 + rtol``."""
    lhs = gauge_R(evaluate(geometric(r), x, y), evaluate(geometric(s), x, y))
    rhs = gauge_R(x, y) ** abs(r - s)
    return lhs <= rhs * (1.0 + rtol)

