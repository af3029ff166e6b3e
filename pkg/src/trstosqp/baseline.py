"""Line-search l1-penalty stochastic SQP, used as the comparison method.

With ``B = I`` the SQP subproblem has the closed-form solution
``dx = -P gbar + v``.  The stepsize is ``beta_k`` times the ratio of the l1
model reduction to ``||dx||^2``, projected into ``[beta_k, beta_k + beta_k^2]``
and divided by the curvature constant ``L_grad + nu L_jac``.  The ratio
formula and penalty update are declared choices; see ``docs/baseline.md``.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import geometry
from .errors import ConfigurationError, ContractViolation, RankDeficiencyError
from .oracle import NoiseModel, estimate_lipschitz, make_streams, sample_gradient
from .problem import ProblemInstance
from .record import RunRecord, TraceBuilder
from .trsqp import BetaSchedule, _safe_true_kkt, true_kkt
from .trsub import _norm

logger = logging.getLogger(__name__)

NAN = float("nan")


@dataclass(frozen=True)
class BaselineConfig:
    beta: str = "const:0.5"
    max_iter: int = 100_000
    kkt_tol: float = 1e-4
    seed: int = 0
    nu_init: float = 1.0
    nu_factor: float = 1.5

    def __post_init__(self):
        if self.max_iter < 0:
            raise ConfigurationError("max_iter must be nonnegative")
        if self.nu_init <= 0 or self.nu_factor <= 1:
            raise ConfigurationError("need nu_init > 0 and nu_factor > 1")
        BetaSchedule.parse(self.beta)


def newton_kkt_step(G, c, gbar, fac=None):
    """Solve ``[I G'; G 0] (dx, lam) = (-gbar, -c)`` for ``dx``."""
    fac = geometry.factorize(G) if fac is None else fac
    return -geometry.project_null(fac, gbar) + geometry.normal_direction(fac, c)


def projected_stepsize(beta_k, reduction_ratio) -> float:
    if beta_k <= 0:
        raise ContractViolation("beta_k must be positive")
    return float(min(max(reduction_ratio, beta_k), beta_k + beta_k**2))


def _penalty_ok(gdx, dxsq, nu, c1, slack):
    return -gdx + nu * c1 + slack >= dxsq + 0.5 * nu * c1


def run_baseline(problem: ProblemInstance, noise: NoiseModel, config: BaselineConfig) -> RunRecord:
    sched = BetaSchedule.parse(config.beta)
    streams = make_streams(config.seed)
    x = np.array(problem.x0, dtype=float)
    L_grad, L_jac = estimate_lipschitz(problem, x, rng=streams["probing"])
    nu = config.nu_init
    trace = TraceBuilder()
    status, message, failed_iter = "budget", "", None
    final_kkt = NAN

    k = 0
    try:
        while True:
            t0 = time.perf_counter_ns()
            c = problem.constraint(x)
            G = problem.constraint_jac(x)
            fac = geometry.factorize(G)
            final_kkt = true_kkt(fac, problem.objective_grad(x), c)
            if final_kkt <= config.kkt_tol:
                status = "converged"
                break
            if k >= config.max_iter:
                break
            beta_k = sched(k)

            gbar = sample_gradient(noise, problem, x, streams["gradient"]).gbar
            Pg = geometry.project_null(fac, gbar)
            dx = -Pg + geometry.normal_direction(fac, c)
            opt, feas = _norm(Pg), _norm(c)
            est_kkt = float(np.hypot(opt, feas))

            gdx = float(gbar @ dx)
            dxsq = float(dx @ dx)
            c1 = float(np.abs(c).sum())
            # with c = 0 both sides equal ||P gbar||^2 in exact arithmetic; the
            # computed gbar'P gbar is off by about eps ||gbar|| ||P gbar||
            slack = 1e-12 * (abs(gdx) + dxsq + _norm(gbar) * np.sqrt(dxsq))
            n_inc = 0
            while not _penalty_ok(gdx, dxsq, nu, c1, slack):
                nu *= config.nu_factor
                n_inc += 1
                if n_inc > 10**6:
                    raise ContractViolation("l1 penalty update did not terminate")
            dq = -gdx + nu * c1
            # the interval [beta_k, beta_k + beta_k^2] is in units of 1/(L_grad + nu L_jac)
            curv = L_grad + nu * L_jac
            ratio = beta_k * dq / dxsq if dxsq > 0 else np.inf
            alpha = projected_stepsize(beta_k, ratio) / curv
            x = x + alpha * dx
            trace.append(k, final_kkt, est_kkt, feas, opt, alpha * np.sqrt(dxsq), NAN, NAN,
                         NAN, 0, nu, 1.0, alpha, NAN, NAN, n_inc, time.perf_counter_ns() - t0)
            k += 1
    except (RankDeficiencyError, ContractViolation, np.linalg.LinAlgError) as exc:
        status, message, failed_iter = "failed", f"{type(exc).__name__}: {exc}", k
        logger.warning("baseline on %s failed at iteration %d: %s", problem.name, k, exc)

    if status == "failed" or not np.isfinite(final_kkt):
        final_kkt = _safe_true_kkt(problem, x)
    return RunRecord(
        solver="l1-baseline",
        problem=problem.name,
        seed=config.seed,
        status=status,
        rows=trace.array(),
        final_x=x,
        final_true_kkt=final_kkt,
        config={**asdict(config), "noise": noise.kind, "sigma2": noise.sigma2},
        message=message,
        failed_iter=failed_iter,
        lipschitz=(L_grad, L_jac),
    )
