"""Multi-seed experiment plans, result files, and case-proportion tables."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .baseline import BaselineConfig, run_baseline
from .bench.logreg import make_logreg_problem
from .bench.libsvm import parse_libsvm, synthetic_dataset
from .bench.problems import PROBLEM_NAMES, make_hs_problem
from .errors import ConfigurationError
from .hessian import KINDS as HESSIAN_KINDS
from .oracle import NoiseModel
from .record import TRACE_SCHEMA_VERSION, RunRecord
from .trsqp import BetaSchedule, SolverConfig, run

logger = logging.getLogger(__name__)

THREADS_ENV = "TRSQP_THREADS"
QUANTILES = (0.0, 0.25, 0.5, 0.75, 1.0)
CASE3_HIGHLIGHT = 25.0
MISSING = "\u2014"


def make_problem(spec):
    """Build a problem from its name.

    Besides the built-in names, ``logreg:PATH[:m[:seed]]`` loads a LIBSVM
    file and ``logreg-synth:N:d[:seed]`` generates a synthetic dataset.
    """
    if spec.startswith("logreg-synth:"):
        parts = spec.split(":")[1:]
        n, d = int(parts[0]), int(parts[1])
        seed = int(parts[2]) if len(parts) > 2 else 0
        ds = synthetic_dataset(n, d, seed, name=f"synth{n}x{d}")
        return make_logreg_problem(ds, m=min(5, d - 1), seed=seed).instance()
    if spec.startswith("logreg:"):
        parts = spec.split(":")[1:]
        m = int(parts[1]) if len(parts) > 1 else 5
        seed = int(parts[2]) if len(parts) > 2 else 0
        return make_logreg_problem(parse_libsvm(parts[0]), m=m, seed=seed).instance()
    return make_hs_problem(spec)


def parse_solver(spec):
    """``tr:<hessian>`` or ``l1``; returns ``(family, hessian or None)``."""
    spec = spec.lower()
    if spec in ("l1", "l1-baseline", "baseline"):
        return "l1", None
    family, _, kind = spec.partition(":")
    if family in ("tr", "tr-stosqp") and kind in HESSIAN_KINDS:
        return "tr", kind
    raise ConfigurationError(f"unknown solver {spec!r}; use tr:<{'|'.join(HESSIAN_KINDS)}> or l1")


@dataclass(frozen=True)
class Cell:
    problem: str
    solver: str
    sigma2: float
    beta: str

    @property
    def key(self) -> str:
        raw = f"{self.problem}__{self.solver}__s2={self.sigma2:g}__beta={self.beta}"
        return re.sub(r"[^A-Za-z0-9_.=+-]", "-", raw)

    @property
    def hessian(self):
        return parse_solver(self.solver)[1] or "-"


@dataclass(frozen=True)
class ExperimentPlan:
    problems: tuple = ("MARATOS",)
    solvers: tuple = ("tr:id",)
    sigma2s: tuple = (1e-4,)
    betas: tuple = ("const:0.5",)
    n_seeds: int = 5
    base_seed: int = 0
    max_iter: int = 100_000
    kkt_tol: float = 1e-4
    noise_kind: str = "gaussian_corr"
    trsub_method: str = "auto"
    output_dir: str = "results"
    timing: bool = False
    epochs: Optional[float] = None

    def __post_init__(self):
        for s in self.solvers:
            parse_solver(s)
        for b in self.betas:
            BetaSchedule.parse(b)
        if self.n_seeds < 1:
            raise ConfigurationError("n_seeds must be at least 1")
        if self.epochs is not None and self.epochs <= 0:
            raise ConfigurationError("epochs must be positive")

    def cells(self):
        return [Cell(p, s, float(v), str(BetaSchedule.parse(b)))
                for p, s, v, b in itertools.product(self.problems, self.solvers, self.sigma2s, self.betas)]

    def seeds(self):
        return list(range(self.base_seed, self.base_seed + self.n_seeds))


@dataclass(frozen=True)
class RunTask:
    cell: Cell
    seed: int
    max_iter: int
    kkt_tol: float
    noise_kind: str
    trsub_method: str = "auto"
    epochs: Optional[float] = None


def budget(problem, max_iter, epochs=None):
    """Iteration budget; ``epochs`` passes over a finite-sum problem override ``max_iter``."""
    if epochs is None or not problem.is_finite_sum:
        return max_iter
    return int(round(epochs * problem.n_components))


def execute(task: RunTask) -> RunRecord:
    """Run one (cell, seed); rebuilds the problem from its name so it can run in a worker."""
    problem = make_problem(task.cell.problem)
    kind = "none" if task.cell.sigma2 == 0 and task.noise_kind == "gaussian_corr" else task.noise_kind
    noise = NoiseModel(kind, task.cell.sigma2 if kind == "gaussian_corr" else 0.0)
    family, hess = parse_solver(task.cell.solver)
    max_iter = budget(problem, task.max_iter, task.epochs)
    if family == "l1":
        cfg = BaselineConfig(beta=task.cell.beta, max_iter=max_iter, kkt_tol=task.kkt_tol,
                             seed=task.seed)
        return run_baseline(problem, noise, cfg)
    cfg = SolverConfig(beta=task.cell.beta, max_iter=max_iter, kkt_tol=task.kkt_tol,
                       hessian=hess, seed=task.seed, trsub_method=task.trsub_method)
    return run(problem, noise, cfg)


def worker_count(n_tasks):
    env = os.environ.get(THREADS_ENV)
    cap = int(env) if env else (os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


def _map(tasks, workers):
    if workers <= 1:
        return [execute(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(execute, tasks))


def quantiles(values):
    v = np.asarray(values, dtype=float)
    v = v[np.isfinite(v)]
    if v.size == 0:
        return [float("nan")] * len(QUANTILES)
    return [float(q) for q in np.quantile(v, QUANTILES)]


def run_plan(plan: ExperimentPlan, workers=None) -> dict:
    """Execute every (cell, seed) and write traces, summaries and proportions.

    Layout under ``plan.output_dir``::

        traces/<cell>/seed<k>.csv
        summary/<cell>.csv        final-KKT quantiles over seeds
        proportions/<cell>.csv    radius-case percentages per seed and mean
        summary.json
    """
    cells = plan.cells()
    tasks = [RunTask(c, s, plan.max_iter, plan.kkt_tol, plan.noise_kind, plan.trsub_method, plan.epochs)
             for c in cells for s in plan.seeds()]
    workers = worker_count(len(tasks)) if workers is None else workers
    records = _map(tasks, workers)

    out = Path(plan.output_dir)
    for sub in ("traces", "summary", "proportions"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    by_cell = {c.key: [] for c in cells}
    for task, rec in zip(tasks, records):
        by_cell[task.cell.key].append((task.seed, rec))

    cell_summaries = []
    for cell in cells:
        runs = sorted(by_cell[cell.key], key=lambda t: t[0])
        tdir = out / "traces" / cell.key
        tdir.mkdir(exist_ok=True)
        for seed, rec in runs:
            rec.to_csv(tdir / f"seed{seed}.csv", timing=plan.timing)
        finals = [rec.final_true_kkt for _, rec in runs]
        q = quantiles(finals)
        with open(out / "summary" / f"{cell.key}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["n_runs", "n_failed", "q0", "q25", "q50", "q75", "q100"])
            w.writerow([len(runs), sum(r.status == "failed" for _, r in runs)] + [repr(v) for v in q])
        props = np.array([rec.case_proportions() for _, rec in runs])
        if cell.hessian != "-":
            # the baseline has no radius cases, so it gets no proportion file
            with open(out / "proportions" / f"{cell.key}.csv", "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\r\n")
                w.writerow(["seed", "case1", "case2", "case3"])
                for (seed, _), p in zip(runs, props):
                    w.writerow([seed] + [f"{v:.4f}" for v in p])
                w.writerow(["mean"] + [f"{v:.4f}" for v in props.mean(axis=0)])
        cell_summaries.append({
            "cell": cell.key,
            "problem": cell.problem,
            "solver": cell.solver,
            "hessian": cell.hessian,
            "sigma2": cell.sigma2,
            "beta": cell.beta,
            "final_kkt": finals,
            "final_kkt_quantiles": dict(zip(("q0", "q25", "q50", "q75", "q100"), q)),
            "case_pct_runs": props.tolist(),
            "case_pct_mean": props.mean(axis=0).tolist(),
            "statuses": [r.status for _, r in runs],
            "seeds": [s for s, _ in runs],
            "failed_all": all(r.status == "failed" for _, r in runs),
        })

    summary = {
        "trace_schema_version": TRACE_SCHEMA_VERSION,
        "plan": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(plan).items()},
        "cells": cell_summaries,
        "failed_cells": [c["cell"] for c in cell_summaries if c["failed_all"]],
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return summary


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def load_summary(path):
    path = Path(path)
    if path.is_dir():
        path = path / "summary.json"
    with open(path) as fh:
        return json.load(fh)


def _sigma_label(s):
    return f"s2={s:g}"


def report_table1(cells, highlight=CASE3_HIGHLIGHT) -> str:
    """Render the beta x Hessian x sigma^2 grid of radius-case percentages.

    Percentages are pooled by averaging per-run proportions over all
    problems and seeds sharing a (beta, Hessian, sigma^2) triple.  Case 3
    entries above ``highlight`` get a trailing ``*``; missing cells print
    ``MISSING``.  Baseline cells (no radius cases) are skipped.
    """
    pooled = {}
    for c in cells:
        if c.get("hessian", "-") == "-":
            continue
        key = (c["beta"], c["hessian"], float(c["sigma2"]))
        pooled.setdefault(key, []).extend(c["case_pct_runs"])
    betas = sorted({k[0] for k in pooled}, key=_beta_sort_key)
    kinds = [h for h in HESSIAN_KINDS if any(k[1] == h for k in pooled)]
    sigmas = sorted({k[2] for k in pooled})

    head1 = f"{'beta':<10} {'B_k':<5}" + "".join(f" | {_sigma_label(s):^23}" for s in sigmas)
    head2 = f"{'':<10} {'':<5}" + "".join(f" | {'C1':>7}{'C2':>7}{'C3':>9}" for _ in sigmas)
    lines = [head1, head2, "-" * len(head2)]
    for b in betas:
        for h in kinds:
            row = f"{b:<10} {h:<5}"
            for s in sigmas:
                runs = pooled.get((b, h, s))
                if not runs:
                    row += f" | {MISSING:>7}{MISSING:>7}{MISSING:>9}"
                    continue
                p = np.mean(np.asarray(runs, dtype=float), axis=0)
                mark = "*" if p[2] > highlight else " "
                row += f" | {p[0]:7.1f}{p[1]:7.1f}{p[2]:8.1f}{mark}"
            lines.append(row)
    return "\n".join(lines) + "\n"


def pooled_case_proportions(cells, beta=None, sigma2=None, hessian=None):
    """Mean per-run case percentages over the matching TR cells."""
    runs = []
    for c in cells:
        if c.get("hessian", "-") == "-":
            continue
        if beta is not None and c["beta"] != str(BetaSchedule.parse(beta)):
            continue
        if sigma2 is not None and not np.isclose(c["sigma2"], sigma2):
            continue
        if hessian is not None and c["hessian"] != hessian:
            continue
        runs.extend(c["case_pct_runs"])
    if not runs:
        return np.full(3, np.nan)
    return np.mean(np.asarray(runs, dtype=float), axis=0)


def _beta_sort_key(b):
    s = BetaSchedule.parse(b)
    return (s.kind != "const", s.value)


def boxplot_rows(cells):
    """Long-format rows ``(problem, solver, sigma2, beta, seed, final_kkt)``."""
    rows = []
    for c in cells:
        for seed, v in zip(c["seeds"], c["final_kkt"]):
            rows.append((c["problem"], c["solver"], c["sigma2"], c["beta"], seed, v))
    return rows


DEFAULT_PROBLEMS = tuple(p for p in PROBLEM_NAMES if p not in ("QP1", "QP2"))
