"""Invariant suite over the built-in problems.

Every iteration of every run already asserts the step invariants inside
:func:`trstosqp.trsqp.run`; this module drives a grid of short runs and
re-verifies the trace-level properties afterwards.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .bench.problems import PROBLEM_NAMES, make_hs_problem
from .hessian import KINDS
from .oracle import NoiseModel
from .record import RunRecord
from .trsqp import SolverConfig, run

CHECK_SIGMA2 = (0.0, 1e-8, 1e-1)
CHECK_BETAS = ("const:0.5", "pow:0.8")


@dataclass(frozen=True)
class CheckResult:
    problem: str
    hessian: str
    sigma2: float
    beta: str
    ok: bool
    detail: str
    n_iter: int


def trace_violations(rec: RunRecord):
    """Trace-level invariant failures of one TR run, as messages."""
    out = []
    if rec.status == "failed":
        out.append(rec.message)
    if rec.n_iter == 0:
        return out
    mu = rec.column("mu")
    if np.any(np.diff(mu) < 0):
        out.append("merit parameter decreased")
    d, df, do = rec.column("delta"), rec.column("delta_feas"), rec.column("delta_opt")
    if np.any(np.abs(df**2 + do**2 - d**2) > 1e-12 * d**2):
        out.append("radius split not orthogonal")
    g = rec.column("gamma")
    if np.any((g < 0) | (g > 1)):
        out.append("relaxation factor outside [0, 1]")
    if np.any(rec.column("eta2") > rec.column("eta1")):
        out.append("eta2 > eta1")
    if np.any(rec.column("eta2") <= 0):
        out.append("eta2 not positive")
    if not set(np.unique(rec.column("case")).astype(int)) <= {1, 2, 3}:
        out.append("unknown radius case")
    return out


def run_check_suite(problems=None, kinds=KINDS, sigma2s=CHECK_SIGMA2, betas=CHECK_BETAS,
                    max_iter=150, seed=0, progress=None):
    """Run the grid and return a list of :class:`CheckResult`."""
    problems = PROBLEM_NAMES if problems is None else problems
    results = []
    for name, kind, s2, beta in itertools.product(problems, kinds, sigma2s, betas):
        problem = make_hs_problem(name)
        noise = NoiseModel("gaussian_corr" if s2 > 0 else "none", s2)
        cfg = SolverConfig(beta=beta, hessian=kind, max_iter=max_iter, seed=seed,
                           check_invariants=True, kkt_tol=0.0)
        rec = run(problem, noise, cfg)
        bad = trace_violations(rec)
        res = CheckResult(name, kind, s2, beta, not bad, "; ".join(bad) or "ok", rec.n_iter)
        results.append(res)
        if progress is not None:
            progress(res)
    return results


def main_check(max_iter=150, out=print):
    t0 = time.perf_counter()

    def show(r):
        flag = "PASS" if r.ok else "FAIL"
        out(f"{flag} {r.problem:<8} {r.hessian:<5} s2={r.sigma2:<7g} beta={r.beta:<10} "
            f"iters={r.n_iter:<5} {r.detail}")

    results = run_check_suite(max_iter=max_iter, progress=show)
    n_bad = sum(not r.ok for r in results)
    out(f"{len(results) - n_bad}/{len(results)} runs passed the invariant suite "
        f"in {time.perf_counter() - t0:.1f}s")
    return n_bad == 0
