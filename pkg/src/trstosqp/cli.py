"""Command-line entry point: ``trstosqp {solve,sweep,report,check}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import experiments
from .baseline import BaselineConfig, run_baseline
from .checks import main_check
from .errors import ConfigurationError
from .hessian import KINDS
from .oracle import NOISE_KINDS, NoiseModel
from .trsqp import SolverConfig, run

SOLVE_DEFAULTS = {
    "problem": "MARATOS",
    "solver": "tr",
    "hessian": "id",
    "noise": 0.0,
    "noise_kind": "gaussian_corr",
    "beta": "const:0.5",
    "seed": 0,
    "max_iter": 100_000,
    "kkt_tol": 1e-4,
    "trsub": "auto",
    "out": None,
    "timing": False,
    "epochs": None,
}
SWEEP_DEFAULTS = {
    "problem": list(experiments.DEFAULT_PROBLEMS),
    "solver": ["tr"],
    "hessian": list(KINDS),
    "noise": [1e-8, 1e-4, 1e-2, 1e-1],
    "noise_kind": "gaussian_corr",
    "beta": ["const:0.5"],
    "seeds": 5,
    "base_seed": 0,
    "max_iter": 100_000,
    "kkt_tol": 1e-4,
    "trsub": "auto",
    "out": "results",
    "timing": False,
    "epochs": None,
    "workers": None,
}


def _common(p, multi):
    nargs = "+" if multi else None
    p.add_argument("--problem", nargs=nargs, help="built-in name, logreg:PATH or logreg-synth:N:d")
    p.add_argument("--solver", nargs=nargs, help="tr or l1 (sweep also takes tr:<hessian>)")
    p.add_argument("--hessian", nargs=nargs, choices=KINDS)
    p.add_argument("--noise", nargs=nargs, type=float, metavar="SIGMA2", help="noise variance")
    p.add_argument("--noise-kind", choices=NOISE_KINDS)
    p.add_argument("--beta", nargs=nargs, help="const:x or pow:s")
    p.add_argument("--max-iter", type=int)
    p.add_argument("--kkt-tol", type=float)
    p.add_argument("--trsub", choices=("auto", "exact", "dogleg", "cauchy"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--config", help="JSON file of option values; flags override it")
    p.add_argument("--timing", action="store_true", default=None,
                   help="include per-iteration wall time in trace CSVs")
    p.add_argument("--epochs", type=float,
                   help="budget in passes over the data for finite-sum problems (overrides --max-iter)")


def build_parser():
    parser = argparse.ArgumentParser(prog="trstosqp", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="run one solver on one problem")
    _common(p, multi=False)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("sweep", help="run an experiment grid over seeds")
    _common(p, multi=True)
    p.add_argument("--seeds", type=int, help="number of seeds per cell")
    p.add_argument("--base-seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default: $TRSQP_THREADS or CPUs)")

    p = sub.add_parser("report", help="case-proportion table from sweep outputs")
    p.add_argument("inputs", nargs="*", help="sweep output directories or summary.json files")
    p.add_argument("--boxplot", help="write long-format final-KKT CSV here")

    p = sub.add_parser("check", help="invariant suite on the built-in problems")
    p.add_argument("--max-iter", type=int, default=150)
    return parser


def resolve(args, defaults):
    """Merge built-in defaults, then the ``--config`` file, then explicit flags."""
    merged = dict(defaults)
    if getattr(args, "config", None):
        with open(args.config) as fh:
            cfg = json.load(fh)
        unknown = set(cfg) - set(defaults)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {', '.join(sorted(unknown))}")
        merged.update(cfg)
    for key in defaults:
        val = getattr(args, key, None)
        if val is not None:
            merged[key] = val
    return merged


def cmd_solve(args):
    o = resolve(args, SOLVE_DEFAULTS)
    problem = experiments.make_problem(o["problem"])
    kind = o["noise_kind"] if o["noise"] > 0 or o["noise_kind"] == "subsample" else "none"
    noise = NoiseModel(kind, o["noise"] if kind == "gaussian_corr" else 0.0)
    max_iter = experiments.budget(problem, o["max_iter"], o["epochs"])
    if o["solver"] == "l1":
        rec = run_baseline(problem, noise, BaselineConfig(
            beta=o["beta"], max_iter=max_iter, kkt_tol=o["kkt_tol"], seed=o["seed"]))
    elif o["solver"] == "tr":
        rec = run(problem, noise, SolverConfig(
            beta=o["beta"], max_iter=max_iter, kkt_tol=o["kkt_tol"], seed=o["seed"],
            hessian=o["hessian"], trsub_method=o["trsub"]))
    else:
        raise ConfigurationError(f"unknown solver {o['solver']!r}; use tr or l1")
    summary = rec.summary()
    if o["out"]:
        out = Path(o["out"])
        out.mkdir(parents=True, exist_ok=True)
        rec.to_csv(out / "trace.csv", timing=o["timing"])
        with open(out / "result.json", "w") as fh:
            json.dump({**summary, "final_x": rec.final_x.tolist(), "config": rec.config},
                      fh, indent=2, sort_keys=True)
            fh.write("\n")
    print(json.dumps(summary, sort_keys=True))
    return 1 if rec.status == "failed" else 0


def cmd_sweep(args):
    o = resolve(args, SWEEP_DEFAULTS)
    solvers = []
    for s in o["solver"]:
        if s == "tr":
            solvers += [f"tr:{h}" for h in o["hessian"]]
        else:
            solvers.append(s)
    plan = experiments.ExperimentPlan(
        problems=tuple(o["problem"]), solvers=tuple(solvers), sigma2s=tuple(o["noise"]),
        betas=tuple(o["beta"]), n_seeds=o["seeds"], base_seed=o["base_seed"],
        max_iter=o["max_iter"], kkt_tol=o["kkt_tol"], noise_kind=o["noise_kind"],
        trsub_method=o["trsub"], output_dir=o["out"], timing=o["timing"], epochs=o["epochs"],
    )
    summary = experiments.run_plan(plan, workers=o["workers"])
    for c in summary["cells"]:
        q = c["final_kkt_quantiles"]
        print(f"{c['cell']}: median final KKT {q['q50']:.3e} statuses {','.join(c['statuses'])}")
    if summary["failed_cells"]:
        print(f"failed cells: {', '.join(summary['failed_cells'])}", file=sys.stderr)
        return 1
    return 0


def cmd_report(args):
    cells = []
    for path in args.inputs:
        cells += experiments.load_summary(path)["cells"]
    sys.stdout.write(experiments.report_table1(cells))
    if args.boxplot:
        with open(args.boxplot, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(["problem", "solver", "sigma2", "beta", "seed", "final_kkt"])
            for row in experiments.boxplot_rows(cells):
                w.writerow([*row[:5], repr(float(row[5]))])
    return 0


def cmd_check(args):
    return 0 if main_check(max_iter=args.max_iter) else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handlers = {"solve": cmd_solve, "sweep": cmd_sweep, "report": cmd_report, "check": cmd_check}
    try:
        return handlers[args.command](args)
    except (ConfigurationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
