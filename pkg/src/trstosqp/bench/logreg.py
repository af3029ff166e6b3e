"""Equality-constrained logistic regression.

``min 1/N sum_i log(1 + exp(-y_i z_i'x))  s.t.  Ax = b`` with ``A, b``
drawn from a standard normal under a seed.  The single-sample oracle draws
one data point per iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .. import geometry
from ..errors import ContractViolation, RankDeficiencyError
from ..problem import ProblemInstance
from .libsvm import Dataset

MAX_ATTEMPTS = 10


@dataclass(frozen=True)
class LogRegProblem:
    dataset: Dataset
    A: np.ndarray
    b: np.ndarray

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def instance(self) -> ProblemInstance:
        return _instance(self)


def logreg_value_grad(problem: LogRegProblem, x, sample=None):
    """Objective value and gradient, over all samples or one sample index."""
    Z, y = problem.dataset.features, problem.dataset.labels
    if sample is not None:
        Z, y = Z[sample:sample + 1], y[sample:sample + 1]
    margin = y * (Z @ x)
    value = float(np.mean(np.logaddexp(0.0, -margin)))
    s = expit(-margin)  # = 1 / (1 + exp(y z'x))
    grad = -(Z.T @ (y * s)) / len(y)
    return value, grad


def logreg_hess(problem: LogRegProblem, x, sample=None):
    Z, y = problem.dataset.features, problem.dataset.labels
    if sample is not None:
        Z, y = Z[sample:sample + 1], y[sample:sample + 1]
    s = expit(y * (Z @ x))
    wts = s * (1.0 - s)
    return (Z.T * wts) @ Z / len(y)


def make_logreg_problem(dataset: Dataset, m=5, seed=0) -> LogRegProblem:
    """Draw ``A`` (m x d) and ``b`` entrywise N(0, 1), retrying until ``A`` has full row rank."""
    if m >= dataset.dim:
        raise ContractViolation(f"need m < d, got m={m}, d={dataset.dim}")
    rng = np.random.default_rng(seed)
    for _ in range(MAX_ATTEMPTS):
        A = rng.standard_normal((m, dataset.dim))
        b = rng.standard_normal(m)
        try:
            geometry.factorize(A)
        except RankDeficiencyError:
            continue
        return LogRegProblem(dataset, A, b)
    raise RankDeficiencyError(f"no full-row-rank A after {MAX_ATTEMPTS} draws")


def _instance(lp: LogRegProblem) -> ProblemInstance:
    A, b = lp.A, lp.b
    m, d = A.shape
    zeros = np.zeros((m, d, d))
    return ProblemInstance(
        name=f"logreg:{lp.dataset.name}",
        dim_x=d,
        dim_c=m,
        objective=lambda x: logreg_value_grad(lp, x)[0],
        objective_grad=lambda x: logreg_value_grad(lp, x)[1],
        objective_hess=lambda x: logreg_hess(lp, x),
        constraint=lambda x: A @ x - b,
        constraint_jac=lambda x: A,
        constraint_hess=lambda x: zeros,
        x0=np.ones(d),
        n_components=lp.dataset.n_samples,
        component_grad=lambda x, i: logreg_value_grad(lp, x, i)[1],
        component_hess=lambda x, i: logreg_hess(lp, x, i),
    )
