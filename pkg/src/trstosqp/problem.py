"""Equality-constrained problem container and exact residual evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ContractViolation

Array = np.ndarray


@dataclass(frozen=True)
class ProblemInstance:
    """Callable bundle describing ``min f(x) s.t. c(x) = 0``.

    ``objective_hess`` and ``constraint_hess`` are optional; without them only
    the identity and SR1 Hessian strategies are available.  Finite-sum
    problems additionally expose per-component gradients and Hessians, which
    the subsampling oracle draws from.

    ``constraint_hess(x)`` returns an ``(m, d, d)`` stack of constraint
    Hessians.
    """

    name: str
    dim_x: int
    dim_c: int
    objective: Callable[[Array], float]
    objective_grad: Callable[[Array], Array]
    constraint: Callable[[Array], Array]
    constraint_jac: Callable[[Array], Array]
    objective_hess: Optional[Callable[[Array], Array]] = None
    constraint_hess: Optional[Callable[[Array], Array]] = None
    x0: Optional[Array] = None
    n_components: Optional[int] = None
    component_grad: Optional[Callable[[Array, int], Array]] = None
    component_hess: Optional[Callable[[Array, int], Array]] = None
    solution: Optional[Array] = None

    def __post_init__(self):
        if self.dim_x < 1 or self.dim_c < 1:
            raise ContractViolation("dimensions must be positive")
        if self.dim_c >= self.dim_x:
            raise ContractViolation(
                f"need m < d for a nonempty tangent space, got m={self.dim_c}, d={self.dim_x}"
            )

    @property
    def has_hessian(self) -> bool:
        return self.objective_hess is not None and self.constraint_hess is not None

    @property
    def is_finite_sum(self) -> bool:
        return self.n_components is not None and self.component_grad is not None

    def lagrangian_hess(self, x, lam, objective_hess=None):
        """``∇²f(x) + Σ λ_i ∇²c_i(x)``; pass ``objective_hess`` to use a sampled one."""
        H = self.objective_hess(x) if objective_hess is None else objective_hess
        return H + np.tensordot(lam, self.constraint_hess(x), axes=1)


@dataclass(frozen=True)
class KKTResidual:
    optimality: float
    feasibility: float
    total: float


def _check_vector(name, v, n):
    v = np.asarray(v, dtype=float)
    if v.shape != (n,):
        raise ContractViolation(f"{name} has shape {v.shape}, expected ({n},)")
    return v


def eval_kkt(problem: ProblemInstance, x, grad, lam) -> KKTResidual:
    """Residuals of ``(grad + G(x)^T lam, c(x))``.

    ``grad`` may be the exact gradient or a stochastic estimate; the
    Lagrangian sign convention is ``∇_x L = g + G^T λ``.
    """
    d, m = problem.dim_x, problem.dim_c
    x = _check_vector("x", x, d)
    grad = _check_vector("grad", grad, d)
    lam = _check_vector("lambda", lam, m)
    G = problem.constraint_jac(x)
    opt = float(np.linalg.norm(grad + G.T @ lam))
    feas = float(np.linalg.norm(problem.constraint(x)))
    return KKTResidual(opt, feas, float(np.hypot(opt, feas)))


def default_fd_step(x) -> float:
    return 1e-5 * max(1.0, float(np.max(np.abs(x))))


def finite_diff_grad(problem: ProblemInstance, x, h=None) -> Array:
    """Central-difference gradient of the objective."""
    x = np.asarray(x, dtype=float)
    h = default_fd_step(x) if h is None else h
    if h <= 0:
        raise ContractViolation("finite-difference step must be positive")
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (problem.objective(x + e) - problem.objective(x - e)) / (2 * h)
    return g


def finite_diff_jac(problem: ProblemInstance, x, h=None) -> Array:
    """Central-difference Jacobian of the constraints, shape ``(m, d)``."""
    x = np.asarray(x, dtype=float)
    h = default_fd_step(x) if h is None else h
    if h <= 0:
        raise ContractViolation("finite-difference step must be positive")
    J = np.empty((problem.dim_c, x.size))
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        J[:, i] = (problem.constraint(x + e) - problem.constraint(x - e)) / (2 * h)
    return J
