"""Trust-region stochastic SQP main loop.

Each iteration picks ``B_k`` and the control parameters before drawing the
gradient, then sets the radius from the *estimated* KKT residual, splits it
between feasibility and optimality, assembles the relaxed step, and finally
raises the merit parameter until the predicted reduction is sufficient.
Stopping uses the *true* KKT residual.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import geometry
from .errors import (
    CapabilityError,
    ConfigurationError,
    ContractViolation,
    InvariantViolation,
    MeritLoopError,
    RankDeficiencyError,
)
from .hessian import KINDS as HESSIAN_KINDS
from .hessian import make_strategy
from .oracle import NoiseModel, estimate_lipschitz, make_streams, sample_gradient, sample_hessian
from .problem import ProblemInstance
from .record import RunRecord, TraceBuilder
from .relax import assemble_step, split_radius
from .trsub import METHODS as TRSUB_METHODS
from .trsub import _norm

logger = logging.getLogger(__name__)

MERIT_CAP = 10**6
# slack for floating-point roundoff in the per-iteration checks
REL_TOL = 1e-10


@dataclass(frozen=True)
class BetaSchedule:
    """``const:b`` gives ``beta_k = b``; ``pow:s`` gives ``beta_k = k^-s``.

    For power schedules ``beta_max = 1`` and ``beta_0 = 1``.
    """

    kind: str
    value: float

    @classmethod
    def parse(cls, spec):
        if isinstance(spec, BetaSchedule):
            return spec
        try:
            kind, raw = str(spec).split(":", 1)
            value = float(raw)
        except ValueError:
            raise ConfigurationError(f"beta schedule {spec!r} is not 'const:x' or 'pow:s'") from None
        if kind not in ("const", "pow"):
            raise ConfigurationError(f"unknown beta schedule kind {kind!r}")
        if not np.isfinite(value) or value <= 0:
            raise ConfigurationError("beta schedule parameter must be positive")
        return cls(kind, value)

    @property
    def beta_max(self) -> float:
        return self.value if self.kind == "const" else 1.0

    def __call__(self, k) -> float:
        if self.kind == "const":
            return self.value
        if k == 0:
            return min(1.0, self.beta_max)
        return float(k) ** (-self.value)

    def __str__(self):
        return f"{self.kind}:{self.value:g}"


@dataclass(frozen=True)
class SolverConfig:
    zeta: float = 10.0
    mu_init: float = 1.0
    rho: float = 1.5
    beta: str = "const:0.5"
    max_iter: int = 100_000
    kkt_tol: float = 1e-4
    hessian: str = "id"
    trsub_method: str = "auto"
    seed: int = 0
    check_invariants: bool = True

    def __post_init__(self):
        if self.zeta <= 0:
            raise ConfigurationError("zeta must be positive")
        if self.mu_init <= 0:
            raise ConfigurationError("mu_init must be positive")
        if self.rho <= 1:
            raise ConfigurationError("rho must exceed 1")
        if self.max_iter < 0:
            raise ConfigurationError("max_iter must be nonnegative")
        if self.hessian.lower() not in HESSIAN_KINDS:
            raise ConfigurationError(f"unknown Hessian kind {self.hessian!r}")
        if self.trsub_method not in TRSUB_METHODS:
            raise ConfigurationError(f"unknown subproblem method {self.trsub_method!r}")
        BetaSchedule.parse(self.beta)

    @property
    def schedule(self) -> BetaSchedule:
        return BetaSchedule.parse(self.beta)


@dataclass(frozen=True)
class ControlParams:
    eta1: float
    tau: float
    alpha: float
    eta2: float
    normB: float
    normG: float
    L_grad: float
    L_jac: float


def control_params(zeta, beta_k, beta_max, normB, normG, L_grad, L_jac, mu_prev) -> ControlParams:
    """Per-iteration scalars; takes no gradient argument by design.

    ``normB = 0`` is read as ``1/||B|| = inf``.
    """
    cap = 6.0 * beta_max / normG
    eta1 = zeta * (min(1.0 / normB, cap) if normB > 0 else cap)
    tau = L_grad + L_jac * mu_prev + normB
    alpha = beta_k / ((4.0 * eta1 * tau + 6.0 * zeta) * beta_max)
    eta2 = eta1 - 0.5 * zeta * eta1 * alpha
    return ControlParams(eta1, tau, alpha, eta2, normB, normG, L_grad, L_jac)


def radius(cp: ControlParams, est_kkt):
    """Trust-region radius and its case label (1, 2 or 3)."""
    if est_kkt <= 0:
        raise ContractViolation("radius needs a positive estimated KKT residual")
    if est_kkt < 1.0 / cp.eta1:
        return cp.eta1 * cp.alpha * est_kkt, 1
    if est_kkt <= 1.0 / cp.eta2:
        return cp.alpha, 2
    return cp.eta2 * cp.alpha * est_kkt, 3


def predicted_reduction(gbar, B, mu, c, G, dx) -> float:
    return float(gbar @ dx + 0.5 * dx @ (B @ dx)
                 + mu * (_norm(c + G @ dx) - _norm(c)))


def sufficient_decrease_bound(opt_res, feas_res, normB, split) -> float:
    """Right-hand side the predicted reduction must not exceed."""
    df, do = split.delta_feas, split.delta_opt
    return -opt_res * do - 0.5 * feas_res * df + 0.5 * normB * do**2 + normB * df * do


@dataclass
class MeritState:
    mu: float
    n_increases: int = 0
    last_increase_iter: int = -1


def update_merit(ms: MeritState, rho, pred_fn, bound, k=-1, tol=0.0):
    """Raise ``mu`` by factors of ``rho`` until ``pred_fn(mu) <= bound + tol``.

    Returns ``(state, n_raised)``.  ``pred_fn`` must be affine and
    non-increasing in ``mu``; a stagnating loop raises
    :class:`MeritLoopError`.
    """
    mu = ms.mu
    n = 0
    pred = pred_fn(mu)
    if pred <= bound + tol:
        return ms, 0
    if pred_fn(rho * mu) >= pred:
        raise MeritLoopError(
            f"predicted reduction {pred:.3e} exceeds bound {bound:.3e} and does not decrease in mu"
        )
    while pred > bound + tol:
        if n >= MERIT_CAP or not np.isfinite(mu):
            raise MeritLoopError(f"merit parameter loop did not terminate (mu={mu:.3e})")
        mu *= rho
        n += 1
        pred = pred_fn(mu)
    return MeritState(mu, ms.n_increases + n, k), n


def true_kkt(fac, g, c) -> float:
    """KKT residual with the least-squares multiplier of the exact gradient."""
    return float(np.hypot(_norm(geometry.project_null(fac, g)), _norm(c)))


def _check(cond, what, k):
    if not cond:
        raise InvariantViolation(f"iteration {k}: {what}")


def run(problem: ProblemInstance, noise: NoiseModel, config: SolverConfig) -> RunRecord:
    """Run the solver from ``problem.x0`` and return the full trace."""
    sched = config.schedule
    beta_max = sched.beta_max
    kind = config.hessian.lower()
    strategy = make_strategy(kind, problem.dim_x)
    if strategy.needs_hessian and not (
        problem.constraint_hess is not None
        and (problem.objective_hess is not None or problem.component_hess is not None)
    ):
        raise CapabilityError(f"{kind} needs Hessian oracles that {problem.name} lacks")

    streams = make_streams(config.seed)
    x = np.array(problem.x0, dtype=float)
    L_grad, L_jac = estimate_lipschitz(problem, x, rng=streams["probing"])
    merit = MeritState(config.mu_init)
    trace = TraceBuilder()
    status, message, failed_iter = "budget", "", None
    check = config.check_invariants
    zeta = config.zeta
    final_kkt = float("nan")

    k = 0
    try:
        while True:
            t0 = time.perf_counter_ns()
            c = problem.constraint(x)
            G = problem.constraint_jac(x)
            fac = geometry.factorize(G)
            g_true = problem.objective_grad(x)
            final_kkt = true_kkt(fac, g_true, c)
            if final_kkt <= config.kkt_tol:
                status = "converged"
                break
            if k >= config.max_iter:
                break

            # Everything up to here is determined by iterations < k.
            B = strategy.produce(k)
            normB = 1.0 if kind == "id" else float(np.abs(np.linalg.eigvalsh(B)).max())
            normG = geometry.jacobian_norm(fac)
            beta_k = sched(k)
            cp = control_params(zeta, beta_k, beta_max, normB, normG, L_grad, L_jac, merit.mu)

            est = sample_gradient(noise, problem, x, streams["gradient"])
            gbar = est.gbar
            lam = geometry.ls_multiplier(fac, gbar)
            grad_lag = gbar + G.T @ lam
            opt = float(_norm(grad_lag))
            feas = float(_norm(c))
            est_kkt = float(np.hypot(opt, feas))
            if est_kkt == 0.0:
                status = "zero-residual"
                message = f"estimated KKT residual is zero at iteration {k}"
                break

            lag_hess = None
            if strategy.needs_hessian:
                H = sample_hessian(noise, problem, x, streams["hessian"], est.sample_id)
                lag_hess = problem.lagrangian_hess(x, lam, objective_hess=H)
            strategy.observe(k, x=x, grad_lag=grad_lag, lag_hess=lag_hess)

            delta, case = radius(cp, est_kkt)
            split = split_radius(delta, feas, opt)
            step = assemble_step(fac, gbar, c, B, split, config.trsub_method, normB=normB)
            dx = step.trial

            lin_res = float(_norm(c + G @ dx))
            base = float(gbar @ dx + 0.5 * dx @ (B @ dx))
            # ||c + G dx|| - ||c|| equals -gamma ||c|| exactly (G t = 0); the closed
            # form avoids cancellation when gamma is tiny
            coef = -step.gamma * feas
            bound = sufficient_decrease_bound(opt, feas, normB, split)
            scale = (abs(base) + abs(bound) + opt * split.delta_opt + normB * delta**2
                     + feas * delta + _norm(gbar) * _norm(dx))
            tol = REL_TOL * scale
            merit, n_inc = update_merit(merit, config.rho, lambda mu: base + mu * coef, bound, k, tol)

            if check:
                dxn = float(_norm(dx))
                _check(dxn <= delta * (1 + REL_TOL), "step leaves the trust region", k)
                _check(abs(split.delta_feas**2 + split.delta_opt**2 - delta**2) <= 1e-12 * delta**2,
                       "radius split is not orthogonal", k)
                _check(0.0 <= step.gamma <= 1.0, "relaxation factor outside [0, 1]", k)
                _check(abs(lin_res - (1 - step.gamma) * feas) <= REL_TOL * (feas + normG * dxn),
                       "feasibility-reduction identity", k)
                _check(step.model_reduction <= -opt * split.delta_opt
                       + 0.5 * normB * split.delta_opt**2 + REL_TOL * (1 + abs(step.model_reduction)),
                       "Cauchy reduction bound", k)
                _check(base + merit.mu * coef <= bound + tol, "sufficient decrease at merit exit", k)
                _check(cp.eta2 <= cp.eta1, "eta2 > eta1", k)
                alpha_u = 1.0 / (6.0 * zeta * beta_max)
                _check(cp.alpha <= alpha_u * beta_k * (1 + REL_TOL), "alpha exceeds alpha_u beta_k", k)
                _check(delta <= cp.eta1 * alpha_u * beta_k * est_kkt * (1 + REL_TOL),
                       "radius exceeds its order bound", k)

            x = x + dx
            trace.append(k, final_kkt, est_kkt, feas, opt, delta, split.delta_feas,
                         split.delta_opt, step.gamma, case, merit.mu, normB, cp.alpha,
                         cp.eta1, cp.eta2, n_inc, time.perf_counter_ns() - t0)
            k += 1
    except (RankDeficiencyError, MeritLoopError, InvariantViolation, ContractViolation,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        status, message, failed_iter = "failed", f"{type(exc).__name__}: {exc}", k
        logger.warning("run on %s failed at iteration %d: %s", problem.name, k, exc)

    if status == "failed" or not np.isfinite(final_kkt):
        final_kkt = _safe_true_kkt(problem, x)
    return RunRecord(
        solver=f"tr-{kind}",
        problem=problem.name,
        seed=config.seed,
        status=status,
        rows=trace.array(),
        final_x=x,
        final_true_kkt=final_kkt,
        config={**asdict(config), "noise": noise.kind, "sigma2": noise.sigma2},
        message=message,
        failed_iter=failed_iter,
        n_sr1_skips=getattr(strategy, "n_skips", 0),
        lipschitz=(L_grad, L_jac),
    )


def _safe_true_kkt(problem, x):
    try:
        fac = geometry.factorize(problem.constraint_jac(x))
        return true_kkt(fac, problem.objective_grad(x), problem.constraint(x))
    except (RankDeficiencyError, ValueError, np.linalg.LinAlgError):
        return float("nan")
