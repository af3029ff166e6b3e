"""Hessian approximations ``B_k`` for the SQP model.

Each strategy is driven in two phases per iteration ``k``:

1. ``produce(k)`` returns ``B_k`` *before* the iteration's gradient draw;
2. ``observe(k, ...)`` feeds in what that draw revealed.

``produce(k)`` refuses to run unless the strategy has observed exactly
iterations ``0..k-1``, so ``B_k`` can only depend on earlier samples.
"""

from __future__ import annotations

import logging

import numpy as np

from .errors import ConfigurationError, ContractViolation

logger = logging.getLogger(__name__)

KINDS = ("id", "sr1", "esth", "aveh")
AVEH_WINDOW = 100
SR1_SKIP_TOL = 1e-8


def sr1_update(H_prev, dx, y, skip_tol=SR1_SKIP_TOL):
    """Symmetric rank-one update; returns ``(H, skipped)``.

    The update is skipped when ``|r'dx| < skip_tol ||r|| ||dx||`` with
    ``r = y - H_prev dx`` (this includes ``r = 0``).
    """
    r = y - H_prev @ dx
    denom = float(r @ dx)
    if abs(denom) < skip_tol * np.linalg.norm(r) * np.linalg.norm(dx) or denom == 0.0:
        return H_prev, True
    return H_prev + np.outer(r, r) / denom, False


class HessianStrategy:
    kind = None
    needs_hessian = False

    def __init__(self, dim):
        self.dim = dim
        self._observed = -1

    def produce(self, k):
        if k != self._observed + 1:
            raise ContractViolation(
                f"B_{k} requested but iterations observed only through {self._observed}"
            )
        if k == 0:
            return np.eye(self.dim)
        return self._current()

    def observe(self, k, *, x, grad_lag, lag_hess=None):
        if k != self._observed + 1:
            raise ContractViolation(f"observe({k}) out of order after {self._observed}")
        self._observed = k
        self._record(k, x, grad_lag, lag_hess)

    def _current(self):
        raise NotImplementedError

    def _record(self, k, x, grad_lag, lag_hess):
        pass


class Identity(HessianStrategy):
    kind = "id"

    def _current(self):
        return np.eye(self.dim)


class SR1(HessianStrategy):
    """``B_k = H_{k-1}`` with ``H_{-1} = H_0 = I``.

    ``H_k`` folds in the pair ``(x_k - x_{k-1}, grad_lag_k - grad_lag_{k-1})``.
    """

    kind = "sr1"

    def __init__(self, dim):
        super().__init__(dim)
        self.H = np.eye(dim)
        self.n_skips = 0
        self._prev = None

    def _current(self):
        return self.H

    def _record(self, k, x, grad_lag, lag_hess):
        if self._prev is not None:
            x_prev, gl_prev = self._prev
            self.H, skipped = sr1_update(self.H, x - x_prev, grad_lag - gl_prev)
            if skipped:
                self.n_skips += 1
                logger.debug("SR1 update skipped at iteration %d", k)
        self._prev = (x.copy(), grad_lag.copy())


class EstimatedHessian(HessianStrategy):
    kind = "esth"
    needs_hessian = True

    def __init__(self, dim):
        super().__init__(dim)
        self._last = None

    def _current(self):
        return self._last

    def _record(self, k, x, grad_lag, lag_hess):
        if lag_hess is None:
            raise ContractViolation("EstH needs a sampled Lagrangian Hessian every iteration")
        self._last = lag_hess


class AveragedHessian(HessianStrategy):
    """Mean of the last ``window`` sampled Lagrangian Hessians (ring buffer)."""

    kind = "aveh"
    needs_hessian = True

    def __init__(self, dim, window=AVEH_WINDOW):
        super().__init__(dim)
        self.window = window
        self._buf = np.zeros((window, dim, dim))
        self._sum = np.zeros((dim, dim))
        self._count = 0

    def _current(self):
        return self._sum / min(self._count, self.window)

    def _record(self, k, x, grad_lag, lag_hess):
        if lag_hess is None:
            raise ContractViolation("AveH needs a sampled Lagrangian Hessian every iteration")
        slot = self._count % self.window
        if self._count >= self.window:
            self._sum -= self._buf[slot]
        self._buf[slot] = lag_hess
        self._sum += lag_hess
        self._count += 1
        if self._count % self.window == 0:
            # resynchronise to stop rounding drift from the running sum
            self._sum = self._buf.sum(axis=0)

    def stored(self):
        n = min(self._count, self.window)
        if self._count <= self.window:
            return self._buf[:n].copy()
        return self._buf.copy()


def make_strategy(kind, dim) -> HessianStrategy:
    classes = {"id": Identity, "sr1": SR1, "esth": EstimatedHessian, "aveh": AveragedHessian}
    try:
        return classes[kind.lower()](dim)
    except KeyError:
        raise ConfigurationError(f"unknown Hessian kind {kind!r}; expected one of {KINDS}") from None
