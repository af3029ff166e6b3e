"""Reading and writing LIBSVM-format classification data.

Each non-blank line is ``<label> <idx>:<value> ...`` with 1-based, strictly
increasing indices.  Features are stored densely.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..errors import ContractViolation, LibsvmParseError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        if self.features.ndim != 2 or self.labels.shape != (self.features.shape[0],):
            raise ContractViolation("features must be N x d and labels length N")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ContractViolation("labels must be -1 or +1")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


def _number(token, lineno, what):
    try:
        value = float(token)
    except ValueError:
        raise LibsvmParseError(lineno, f"non-numeric {what} {token!r}") from None
    if not math.isfinite(value):
        raise LibsvmParseError(lineno, f"non-finite {what} {token!r}")
    return value


def _normalize_labels(raw, name):
    values = sorted(set(raw))
    if set(values) <= {-1.0, 1.0}:
        return np.array(raw)
    if set(values) <= {0.0, 1.0}:
        return np.where(np.array(raw) == 0.0, -1.0, 1.0)
    if len(values) == 2:
        # two-class sets with other codes (e.g. 2/4): smaller code becomes -1
        logger.info("%s: mapping labels %g -> -1 and %g -> +1", name, values[0], values[1])
        return np.where(np.array(raw) == values[0], -1.0, 1.0)
    raise LibsvmParseError(0, f"expected two label classes, found {len(values)}")


def parse_libsvm_text(text, dim_hint=None, name="dataset") -> Dataset:
    labels, rows = [], []
    max_idx = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = line.split()
        if not tokens:
            continue
        labels.append(_number(tokens[0], lineno, "label"))
        entries = {}
        prev = 0
        for tok in tokens[1:]:
            idx_s, sep, val_s = tok.partition(":")
            if not sep:
                raise LibsvmParseError(lineno, f"missing ':' in {tok!r}")
            try:
                idx = int(idx_s)
            except ValueError:
                raise LibsvmParseError(lineno, f"bad feature index {idx_s!r}") from None
            if idx <= 0:
                raise LibsvmParseError(lineno, f"feature index must be >= 1, got {idx}")
            if idx <= prev:
                raise LibsvmParseError(lineno, f"feature indices must increase ({idx} after {prev})")
            prev = idx
            entries[idx - 1] = _number(val_s, lineno, "value")
        max_idx = max(max_idx, prev)
        rows.append(entries)
    if not rows:
        raise LibsvmParseError(0, "no data lines")
    dim = max_idx if dim_hint is None else int(dim_hint)
    if dim < max_idx:
        raise LibsvmParseError(0, f"dim_hint {dim} is smaller than the largest index {max_idx}")
    X = np.zeros((len(rows), dim))
    for i, entries in enumerate(rows):
        for j, v in entries.items():
            X[i, j] = v
    return Dataset(X, _normalize_labels(labels, name), name)


def parse_libsvm(path, dim_hint=None) -> Dataset:
    """Load a LIBSVM file (UTF-8, LF or CRLF line endings)."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    name = str(path).replace("\\", "/").rsplit("/", 1)[-1]
    return parse_libsvm_text(text, dim_hint, name)


def format_libsvm(dataset: Dataset) -> str:
    """Serialize with ``repr`` floats, so parsing it back is exact."""
    lines = []
    for y, z in zip(dataset.labels, dataset.features):
        parts = ["+1" if y > 0 else "-1"]
        parts += [f"{j + 1}:{float(v)!r}" for j, v in enumerate(z) if v != 0.0]
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def write_libsvm(dataset: Dataset, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_libsvm(dataset))


def synthetic_dataset(n_samples, dim, seed=0, density=1.0, name="synthetic") -> Dataset:
    """Linearly separable-ish random data for tests and demos."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n_samples, dim))
    if density < 1.0:
        X *= rng.random((n_samples, dim)) < density
    w = rng.standard_normal(dim)
    noise = 0.5 * rng.standard_normal(n_samples)
    y = np.where(X @ w + noise >= 0, 1.0, -1.0)
    return Dataset(X, y, name)
