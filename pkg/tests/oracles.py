"""Independent reference computations used by the test-suite."""

import numpy as np
from scipy.optimize import brentq


def trs_eigen_oracle(H, g, radius):
    """Global minimum of 1/2 u'Hu + g'u over ||u|| <= radius via the eigenbasis.

    Works entirely in eigen-coordinates: bisection/brentq on the secular
    function, explicit hard-case assembly.  Returns (u, value).
    """
    lam, V = np.linalg.eigh(H)
    gt = V.T @ g
    scale = max(1.0, np.abs(lam).max())
    tiny = 1e-13 * scale

    def value(u):
        return 0.5 * u @ H @ u + g @ u

    def p_of(nu):
        return V @ (-gt / (lam + nu))

    cands = []
    if lam[0] > tiny:
        p = p_of(0.0)
        if np.linalg.norm(p) <= radius:
            cands.append(p)
    nu_low = max(0.0, -lam[0])
    bottom = np.abs(lam - lam[0]) <= tiny
    # limit of ||p(nu)|| as nu -> nu_low from above, ignoring the bottom eigenspace
    rest = ~bottom if lam[0] <= tiny else np.ones_like(bottom)
    if lam[0] <= tiny and np.all(np.abs(gt[bottom]) <= 1e-14 * max(1.0, np.linalg.norm(g))):
        ph_t = np.zeros_like(gt)
        ph_t[rest] = -gt[rest] / (lam[rest] + nu_low)
        ph = V @ ph_t
        if np.linalg.norm(ph) <= radius:
            z = V[:, 0]
            t = np.sqrt(max(radius**2 - ph @ ph, 0.0))
            cands += [ph + t * z, ph - t * z]
            if lam[0] >= -tiny:
                cands.append(ph)
    def phi(nu):
        return np.linalg.norm(p_of(nu)) - radius
    lo = nu_low + 1e-300
    lo_eps = nu_low * (1 + 1e-15) + 1e-15 * scale
    hi = nu_low + np.linalg.norm(g) / radius + 1.0
    if np.linalg.norm(g) > 0 and phi(lo_eps) > 0:
        nu = brentq(phi, lo_eps, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        p = p_of(nu)
        cands.append(p * radius / np.linalg.norm(p))
    if not cands:
        cands.append(np.zeros_like(g))
    best = min(cands, key=value)
    return best, value(best)
