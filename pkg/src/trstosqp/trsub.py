"""Trust-region subproblem ``min 1/2 u'Hu + g'u  s.t. ||u|| <= radius``.

``H`` is symmetric and may be indefinite or singular.  Every method returns a
point whose model value is no worse than the Cauchy point's.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky

from .errors import ContractViolation

logger = logging.getLogger(__name__)

METHODS = ("cauchy", "dogleg", "exact", "auto")
AUTO_EXACT_MAX_DIM = 200


@dataclass(frozen=True)
class TangentialSolution:
    u: np.ndarray
    model_reduction: float
    solver_used: str
    boundary_active: bool
    multiplier: float = 0.0


def _norm(v):
    return math.sqrt(float(v @ v))


def model_value(H, g, u) -> float:
    return float(0.5 * u @ (H @ u) + g @ u)


def _solution(H, g, u, used, radius, multiplier=0.0):
    boundary = radius > 0 and _norm(u) >= radius * (1 - 1e-10)
    return TangentialSolution(u, model_value(H, g, u), used, bool(boundary), float(multiplier))


def cauchy_point(H, g, radius) -> TangentialSolution:
    """Minimizer of the model along ``-g`` inside the ball."""
    if radius < 0:
        raise ContractViolation("radius must be nonnegative")
    gnorm = float(_norm(g))
    if gnorm == 0.0 or radius == 0.0:
        return _solution(H, g, np.zeros_like(g), "cauchy", radius)
    gHg = float(g @ (H @ g))
    if gnorm**3 <= radius * gHg:
        u = -(gnorm**2 / gHg) * g
    else:
        u = -(radius / gnorm) * g
    return _solution(H, g, u, "cauchy", radius)


def _boundary_tau(p, d, radius):
    """Largest ``tau >= 0`` with ``||p + tau d|| = radius`` (``||p|| <= radius``)."""
    a = d @ d
    b = p @ d
    c = p @ p - radius**2
    disc = np.sqrt(max(b * b - a * c, 0.0))
    # Stable root of a tau^2 + 2 b tau + c = 0 with c <= 0.
    return -c / (b + disc) if b > 0 else (disc - b) / a


def dogleg(H, g, radius) -> TangentialSolution:
    if radius < 0:
        raise ContractViolation("radius must be nonnegative")
    gnorm = _norm(g)
    if gnorm == 0.0 or radius == 0.0:
        return _solution(H, g, np.zeros_like(g), "dogleg", radius)
    try:
        L = cholesky(H, lower=True, check_finite=False)
    except LinAlgError:
        logger.info("dogleg needs a positive definite model Hessian; using the Cauchy point")
        return cauchy_point(H, g, radius)
    p_newton = -cho_solve((L, True), g, check_finite=False)
    if _norm(p_newton) <= radius:
        return _solution(H, g, p_newton, "dogleg", radius)
    p_sd = -(gnorm**2 / (g @ (H @ g))) * g
    if _norm(p_sd) >= radius:
        return _solution(H, g, -(radius / gnorm) * g, "dogleg", radius)
    tau = _boundary_tau(p_sd, p_newton - p_sd, radius)
    return _solution(H, g, p_sd + tau * (p_newton - p_sd), "dogleg", radius)


def _exact(H, g, radius, tol, max_iter=200):
    """Global minimizer via the secular equation ``||p(nu)|| = radius``.

    ``p(nu) = -(H + nu I)^{-1} g`` is evaluated in the eigenbasis of ``H``.
    The shift is found by safeguarded Newton steps on ``1/||p(nu)||``
    inside the bracket ``[nu_low, nu_low + ||g||/radius]``, where ``nu_low``
    is the smallest shift making ``H + nu I`` positive semidefinite.  When
    ``g`` has no component along the bottom eigenspace (the hard case) the
    boundary point is completed with a bottom eigenvector.  Returns
    ``(u, nu)``.
    """
    w, V = np.linalg.eigh(H)
    a = V.T @ g
    lam1 = float(w[0])
    scale = max(1.0, abs(lam1), abs(float(w[-1])))
    gnorm = _norm(g)

    if lam1 > 0:
        p = -a / w
        if _norm(p) <= radius:
            return V @ p, 0.0
    nu_low = max(0.0, -lam1)

    if lam1 <= 1e-12 * scale:
        bottom = w - lam1 <= 1e-10 * scale
        if _norm(a[bottom]) <= 1e-9 * gnorm:
            # g misses the bottom eigenspace; look at the limit point p(nu_low)
            p = np.zeros_like(a)
            p[~bottom] = -a[~bottom] / (w[~bottom] + nu_low)
            pn = _norm(p)
            if pn <= radius:
                if lam1 >= -1e-12 * scale:
                    # singular PSD: interior and boundary minimizers tie; keep interior
                    return V @ p, 0.0
                i = int(np.flatnonzero(bottom)[0])
                p[i] = np.sqrt(max(radius**2 - pn**2, 0.0))
                return V @ p, nu_low

    nu_up = nu_low + gnorm / radius
    nu = 0.0 if lam1 > 0 else nu_low + 1e-3 * (nu_up - nu_low)
    a2 = a * a
    p = None
    for _ in range(max_iter):
        shifted = w + nu
        if shifted[0] <= 0:
            nu_low = nu
            nu = 0.5 * (nu_low + nu_up)
            continue
        p = -a / shifted
        pn = _norm(p)
        if abs(pn - radius) <= tol * radius:
            break
        if pn < radius:
            nu_up = nu
        else:
            nu_low = nu
        if nu_up - nu_low <= 1e-15 * max(1.0, nu_up):
            break
        q2 = float(np.sum(a2 / shifted**3))
        nu_new = nu + (pn * pn / q2) * (pn - radius) / radius
        nu = nu_new if nu_low < nu_new < nu_up else 0.5 * (nu_low + nu_up)
    if p is None or not np.all(np.isfinite(p)) or _norm(p) == 0.0:
        p = -a / (w + nu_up)
    return V @ (p * (radius / _norm(p))), nu


def solve_tangential(H, g, radius, method="auto", tol=1e-8) -> TangentialSolution:
    """Solve the subproblem with the requested method.

    ``method="auto"`` picks ``exact`` for dimensions up to 200 and the Cauchy
    point beyond.  The returned point never has a larger model value than the
    Cauchy point.
    """
    if method not in METHODS:
        raise ContractViolation(f"unknown subproblem method {method!r}")
    if radius < 0:
        raise ContractViolation("radius must be nonnegative")
    g = np.asarray(g, dtype=float)
    if method == "auto":
        method = "exact" if g.size <= AUTO_EXACT_MAX_DIM else "cauchy"
    cp = cauchy_point(H, g, radius)
    if method == "cauchy" or radius == 0.0:
        return cp
    if method == "dogleg":
        sol = dogleg(H, g, radius)
    else:
        u, nu = _exact(H, g, radius, tol)
        sol = _solution(H, g, u, "exact", radius, nu)
    if sol.model_reduction > cp.model_reduction:
        return cp
    return sol
