"""Stochastic gradient/Hessian oracles and Lipschitz probing.

Randomness contract: each run owns one generator per purpose (gradient,
hessian, probing), all derived from the run seed, so that turning Hessian
sampling on never perturbs the gradient sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapabilityError, ConfigurationError
from .problem import ProblemInstance

NOISE_KINDS = ("none", "gaussian_corr", "subsample")
PURPOSES = ("gradient", "hessian", "probing")

LIPSCHITZ_FLOOR = 1e-3
PROBE_DISTANCE = 0.1
PROBE_COUNT = 50


@dataclass(frozen=True)
class NoiseModel:
    """Noise configuration.  The seed lives on the solver config, not here."""

    kind: str = "none"
    sigma2: float = 0.0

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ConfigurationError(f"unknown noise kind {self.kind!r}")
        if self.sigma2 < 0:
            raise ConfigurationError("sigma2 must be nonnegative")


@dataclass(frozen=True)
class GradientEstimate:
    gbar: np.ndarray
    sample_id: Optional[int] = None


def make_streams(seed: int) -> dict:
    """One independent generator per purpose, keyed by purpose name."""
    root = np.random.SeedSequence(seed)
    return {name: np.random.default_rng(child) for name, child in zip(PURPOSES, root.spawn(len(PURPOSES)))}


def sample_gradient(model: NoiseModel, problem: ProblemInstance, x, rng) -> GradientEstimate:
    """Draw one gradient estimate at ``x``.

    ``gaussian_corr`` adds ``sigma (e0 * 1 + e)`` with ``e0 ~ N(0, 1)`` and
    ``e ~ N(0, I)``, whose covariance is ``sigma^2 (I + 1 1^T)``.
    """
    if model.kind == "subsample":
        if not problem.is_finite_sum:
            raise CapabilityError(f"{problem.name} is not a finite-sum problem")
        i = int(rng.integers(problem.n_components))
        return GradientEstimate(problem.component_grad(x, i), i)
    g = problem.objective_grad(x)
    if model.kind == "none" or model.sigma2 == 0.0:
        return GradientEstimate(g)
    z = rng.standard_normal(problem.dim_x + 1)
    return GradientEstimate(g + np.sqrt(model.sigma2) * (z[0] + z[1:]))


def sample_hessian(model: NoiseModel, problem: ProblemInstance, x, rng, sample_id=None):
    """Draw a symmetric objective-Hessian estimate at ``x``.

    In ``subsample`` mode ``sample_id`` must be the index drawn by the paired
    gradient call.
    """
    if model.kind == "subsample":
        if problem.component_hess is None:
            raise CapabilityError(f"{problem.name} has no component Hessians")
        if sample_id is None:
            raise CapabilityError("subsample Hessian needs the paired gradient sample id")
        return problem.component_hess(x, sample_id)
    if problem.objective_hess is None:
        raise CapabilityError(f"{problem.name} has no Hessian oracle")
    H = problem.objective_hess(x)
    if model.kind == "none" or model.sigma2 == 0.0:
        return H
    E = np.triu(rng.standard_normal(H.shape))
    E = E + np.triu(E, 1).T
    return H + np.sqrt(model.sigma2) * E


def estimate_lipschitz(problem: ProblemInstance, x0, n_probe=PROBE_COUNT, rng=None,
                       delta=PROBE_DISTANCE):
    """Difference-quotient estimates of the gradient and Jacobian Lipschitz constants.

    Probes ``n_probe`` random unit directions at distance ``delta`` from
    ``x0``; the Jacobian uses the spectral norm.  Both results are floored at
    ``1e-3``.
    """
    if n_probe < 2:
        raise ConfigurationError("n_probe must be at least 2")
    rng = np.random.default_rng() if rng is None else rng
    x0 = np.asarray(x0, dtype=float)
    g0 = problem.objective_grad(x0)
    G0 = problem.constraint_jac(x0)
    L_grad = L_jac = 0.0
    for _ in range(n_probe):
        u = rng.standard_normal(x0.size)
        u /= np.linalg.norm(u)
        x = x0 + delta * u
        L_grad = max(L_grad, np.linalg.norm(problem.objective_grad(x) - g0) / delta)
        L_jac = max(L_jac, np.linalg.norm(problem.constraint_jac(x) - G0, 2) / delta)
    return max(float(L_grad), LIPSCHITZ_FLOOR), max(float(L_jac), LIPSCHITZ_FLOOR)
