"""Per-run trace storage and CSV serialization."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

TRACE_SCHEMA_VERSION = 1
TRACE_COLUMNS = (
    "k", "true_kkt", "est_kkt", "feas", "opt", "delta", "delta_feas", "delta_opt",
    "gamma", "case", "mu", "normB", "alpha", "eta1", "eta2", "n_merit_inc", "wall_ns",
)
INT_COLUMNS = frozenset({"k", "case", "n_merit_inc", "wall_ns"})
COL = {name: i for i, name in enumerate(TRACE_COLUMNS)}

STATUSES = ("converged", "budget", "failed", "zero-residual")


@dataclass
class RunRecord:
    """Trace and outcome of one solver run.

    ``rows`` has one row per executed iteration, columns as in
    ``TRACE_COLUMNS``.  ``final_true_kkt`` is the true KKT residual at the
    last iterate, which is not part of any row when the run stops.
    """

    solver: str
    problem: str
    seed: int
    status: str
    rows: np.ndarray
    final_x: np.ndarray
    final_true_kkt: float
    config: dict = field(default_factory=dict)
    message: str = ""
    failed_iter: Optional[int] = None
    n_sr1_skips: int = 0
    lipschitz: tuple = (float("nan"), float("nan"))

    @property
    def n_iter(self) -> int:
        return self.rows.shape[0]

    def column(self, name):
        return self.rows[:, COL[name]]

    def case_proportions(self):
        """Percent of iterations in radius cases 1, 2, 3 (zeros if no rows).

        Baseline runs record case 0 and so give all zeros.
        """
        if self.n_iter == 0:
            return np.zeros(3)
        cases = self.column("case")
        return np.array([100.0 * np.mean(cases == j) for j in (1, 2, 3)])

    def merit_increase_iters(self):
        """Iteration indices where the merit parameter was raised."""
        return self.column("k")[self.column("n_merit_inc") > 0].astype(int)

    def to_csv(self, path_or_buf=None, timing=False):
        """Write the trace as CSV; returns the text when no target is given.

        Wall times are omitted unless ``timing`` is set so that reruns are
        byte-identical.
        """
        cols = TRACE_COLUMNS if timing else TRACE_COLUMNS[:-1]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(cols)
        for row in self.rows:
            w.writerow([_fmt(name, row[COL[name]]) for name in cols])
        text = buf.getvalue()
        if path_or_buf is None:
            return text
        if hasattr(path_or_buf, "write"):
            path_or_buf.write(text)
        else:
            with open(path_or_buf, "w", newline="") as fh:
                fh.write(text)
        return text

    def summary(self) -> dict:
        return {
            "solver": self.solver,
            "problem": self.problem,
            "seed": self.seed,
            "status": self.status,
            "n_iter": self.n_iter,
            "final_true_kkt": self.final_true_kkt,
            "case_pct": [float(p) for p in self.case_proportions()],
            "n_merit_increases": int(self.column("n_merit_inc").sum()) if self.n_iter else 0,
            "message": self.message,
        }


def _fmt(name, value):
    if name in INT_COLUMNS:
        return str(int(value))
    return repr(float(value))


def read_trace_csv(path):
    """Parse a trace CSV back into ``(columns, array)``."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = [[float(v) for v in row] for row in reader]
    return header, np.array(data, dtype=float).reshape(len(data), len(header))


class TraceBuilder:
    """Row accumulator; cheaper than growing an array every iteration."""

    def __init__(self):
        self._rows = []

    def append(self, *values):
        self._rows.append(values)

    def __len__(self):
        return len(self._rows)

    def array(self):
        if not self._rows:
            return np.empty((0, len(TRACE_COLUMNS)))
        return np.array(self._rows, dtype=float)
