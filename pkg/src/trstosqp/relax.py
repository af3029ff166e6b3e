"""Adaptive relaxation: radius split, relaxation factor, and trial-step assembly.

The trust-region radius is split in proportion to the feasibility and
optimality residuals.  The normal step is the minimum-norm linearized
feasibility step shortened to fit its share; the tangential step solves a
trust-region subproblem in ``ker(G)`` with the remaining share.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import ContractViolation
from .trsub import _norm, solve_tangential


@dataclass(frozen=True)
class RadiusSplit:
    delta: float
    delta_feas: float
    delta_opt: float


@dataclass(frozen=True)
class StepDecomposition:
    gamma: float
    normal: np.ndarray
    tangential: np.ndarray
    trial: np.ndarray
    split: RadiusSplit
    v: np.ndarray
    u: np.ndarray
    model_reduction: float
    solver_used: str


def split_radius(delta, feas_res, opt_res) -> RadiusSplit:
    total = float(np.hypot(feas_res, opt_res))
    if total <= 0.0:
        raise ContractViolation("radius split needs a positive estimated KKT residual")
    return RadiusSplit(float(delta), delta * feas_res / total, delta * opt_res / total)


def relaxation_factor(delta_feas, v) -> float:
    vnorm = float(_norm(v))
    if vnorm == 0.0:
        raise ContractViolation("relaxation factor undefined for a zero normal direction")
    return min(delta_feas / vnorm, 1.0)


def tangential_model_matrix(B, P, shift):
    """``P B P + shift (I - P)``.

    On ``ker(G)`` this acts as ``P B P``; the shift only gives ``im(G^T)``
    positive curvature so the subproblem solver sees no artificial zero
    eigenvalues.  Model values of points in ``ker(G)`` are unchanged.
    """
    PBP = P @ B @ P
    M = PBP + shift * (geometry.identity(P.shape[0]) - P)
    return 0.5 * (M + M.T)


def assemble_step(fac, gbar, c, B, split: RadiusSplit, trsub_method="auto",
                  *, normB=None, P=None, tol=1e-8) -> StepDecomposition:
    """Compute ``dx = gamma v + P u`` for the given radius split.

    ``normB`` and ``P`` may be passed to reuse values the caller already has.
    """
    v = geometry.normal_direction(fac, c)
    vnorm = float(_norm(v))
    if vnorm == 0.0:
        if np.any(c):
            raise ContractViolation("zero normal direction with nonzero constraint value")
        gamma = 1.0
    else:
        gamma = relaxation_factor(split.delta_feas, v)
    w = gamma * v

    if P is None:
        P = geometry.projector(fac)
    if normB is None:
        normB = float(np.abs(np.linalg.eigvalsh(B)).max())
    Pg = geometry.project_null(fac, gbar)
    M = tangential_model_matrix(B, P, 1.0 + normB)
    sol = solve_tangential(M, Pg, split.delta_opt, trsub_method, tol)
    t = geometry.project_null(fac, sol.u)

    dx = w + t
    delta = split.delta
    if _norm(dx) > delta * (1 + 1e-10):
        room = np.sqrt(max(delta**2 - w @ w, 0.0))
        tn = _norm(t)
        if tn > 0:
            t = t * (room / tn)
        dx = w + t
    # m(u) = 1/2 t'Bt + gbar't with t = P u
    reduction = float(0.5 * t @ (B @ t) + gbar @ t)
    return StepDecomposition(gamma, w, t, dx, split, v, sol.u, reduction, sol.solver_used)
