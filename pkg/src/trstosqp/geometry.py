"""Constraint-space linear algebra built on a Cholesky factor of ``G G^T``.

All operations avoid forming the projector ``P = I - G^T (G G^T)^{-1} G``
except :func:`projector`, which the tangential subproblem needs densely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky

from .errors import ContractViolation, RankDeficiencyError

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class ConstraintFactorization:
    G: np.ndarray
    gram_chol: np.ndarray
    condition_estimate: float
    # (G G^T)^{-1} G, shape (m, d); every operation below reuses it.
    _solved_G: np.ndarray = field(repr=False)

    @property
    def gram(self):
        return self.gram_chol @ self.gram_chol.T

    def solve_gram(self, rhs):
        return cho_solve((self.gram_chol, True), rhs, check_finite=False)


def factorize(G) -> ConstraintFactorization:
    """Cholesky-factor ``G G^T`` and reject numerically rank-deficient ``G``."""
    G = np.atleast_2d(np.asarray(G, dtype=float))
    m, d = G.shape
    if m >= d:
        raise ContractViolation(f"G must be m x d with m < d, got {G.shape}")
    gram = G @ G.T
    if not np.isfinite(gram.sum()):
        raise RankDeficiencyError("G has non-finite entries")
    try:
        L = cholesky(gram, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise RankDeficiencyError("G G^T is singular") from exc
    gram_inv = cho_solve((L, True), np.eye(m), check_finite=False)
    cond = float(np.abs(gram).sum(axis=0).max() * np.abs(gram_inv).sum(axis=0).max())
    if not np.isfinite(cond) or cond >= MAX_CONDITION:
        raise RankDeficiencyError(f"G G^T condition estimate {cond:.3e} >= {MAX_CONDITION:.0e}")
    return ConstraintFactorization(G, L, cond, gram_inv @ G)


@lru_cache(maxsize=64)
def identity(d):
    """Cached read-only ``d x d`` identity."""
    eye = np.eye(d)
    eye.flags.writeable = False
    return eye


def project_null(fac: ConstraintFactorization, y):
    """``P y``: orthogonal projection of ``y`` onto ``ker(G)``."""
    return y - fac.G.T @ (fac._solved_G @ y)


def normal_direction(fac: ConstraintFactorization, c):
    """Minimum-norm ``v`` with ``G v = -c``, i.e. ``v = -G^T (G G^T)^{-1} c``."""
    return -(fac._solved_G.T @ c)


def ls_multiplier(fac: ConstraintFactorization, gbar):
    """Least-squares multiplier ``-(G G^T)^{-1} G gbar``.

    With this choice ``gbar + G^T lambda`` equals ``P gbar``.
    """
    return -(fac._solved_G @ gbar)


def projector(fac: ConstraintFactorization):
    P = identity(fac.G.shape[1]) - fac.G.T @ fac._solved_G
    return 0.5 * (P + P.T)


def jacobian_norm(fac: ConstraintFactorization) -> float:
    """Spectral norm of ``G`` from the eigenvalues of the Gram matrix."""
    if fac.G.shape[0] == 1:
        return float(fac.gram_chol[0, 0])
    return float(np.sqrt(np.linalg.eigvalsh(fac.gram)[-1]))


def smallest_singular_value(fac: ConstraintFactorization) -> float:
    return float(np.sqrt(max(np.linalg.eigvalsh(fac.gram)[0], 0.0)))
