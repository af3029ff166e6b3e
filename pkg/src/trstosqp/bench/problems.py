"""Analytic equality-constrained test problems.

The nonlinear problems are reimplementations of small Hock-Schittkowski /
CUTEst models with their standard starting points.  BT8 is not provided: its
constraint Jacobian loses rank at the solution, which the solver refuses by
design.  ``QP1`` and ``QP2`` are convex quadratics whose KKT point solves a
linear system.

Stored optima were polished with Newton's method on the KKT system and have
a KKT residual below ``1e-8``.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConfigurationError
from ..problem import ProblemInstance

SQ2 = np.sqrt(2.0)


def _make(name, f, g, h, c, jac, chess, x0, solution=None):
    x0 = np.asarray(x0, dtype=float)
    m = len(c(x0))
    return ProblemInstance(
        name=name, dim_x=x0.size, dim_c=m,
        objective=f, objective_grad=g, objective_hess=h,
        constraint=c, constraint_jac=jac, constraint_hess=chess,
        x0=x0, solution=None if solution is None else np.asarray(solution, dtype=float),
    )


def _diag3(*entries):
    """Stack of diagonal matrices, one per constraint."""
    return np.array([np.diag(e) for e in entries], dtype=float)


def bt4():
    return _make(
        "BT4",
        lambda x: x[0] - x[1] + x[1] ** 3,
        lambda x: np.array([1.0, -1.0 + 3 * x[1] ** 2, 0.0]),
        lambda x: np.diag([0.0, 6 * x[1], 0.0]),
        lambda x: np.array([x @ x - 25.0, x.sum() - 1.0]),
        lambda x: np.array([2 * x, np.ones(3)]),
        lambda x: _diag3([2.0, 2, 2], [0.0, 0, 0]),
        [4.0382, -2.9470, -0.09115],
        [2.28449660117085, -3.72089325575881, 2.43639665458797],
    )


def bt5():
    Hf = np.array([[-2.0, -1, -1], [-1, -4, 0], [-1, 0, -2]])
    return _make(
        "BT5",
        lambda x: 1000 - x[0] ** 2 - 2 * x[1] ** 2 - x[2] ** 2 - x[0] * x[1] - x[0] * x[2],
        lambda x: Hf @ x,
        lambda x: Hf.copy(),
        lambda x: np.array([x @ x - 25.0, 8 * x[0] + 14 * x[1] + 7 * x[2] - 56]),
        lambda x: np.array([2 * x, [8.0, 14, 7]]),
        lambda x: _diag3([2.0, 2, 2], [0.0, 0, 0]),
        [2.0, 2, 2],
        [3.51212134187472, 0.21698794151522, 3.55217115482702],
    )


def _bt9(name):
    return _make(
        name,
        lambda x: -x[0],
        lambda x: np.array([-1.0, 0, 0, 0]),
        lambda x: np.zeros((4, 4)),
        lambda x: np.array([x[1] - x[0] ** 3 - x[2] ** 2, x[0] ** 2 - x[1] - x[3] ** 2]),
        lambda x: np.array([[-3 * x[0] ** 2, 1, -2 * x[2], 0], [2 * x[0], -1, 0, -2 * x[3]]]),
        lambda x: _diag3([-6 * x[0], 0, -2, 0], [2.0, 0, 0, -2]),
        [2.0, 2, 2, 2],
        [1.0, 1, 0, 0],
    )


def bt9():
    return _bt9("BT9")


def hs39():
    # identical model to BT9 in the collection
    return _bt9("HS39")


def maratos():
    return _make(
        "MARATOS",
        lambda x: 2 * (x @ x - 1) - x[0],
        lambda x: 4 * x - np.array([1.0, 0]),
        lambda x: 4 * np.eye(2),
        lambda x: np.array([x @ x - 1]),
        lambda x: (2 * x)[None, :],
        lambda x: (2 * np.eye(2))[None],
        [1.1, 0.1],
        [1.0, 0],
    )


def hs40():
    def grad(x):
        a, b, c, d = x
        return -np.array([b * c * d, a * c * d, a * b * d, a * b * c])

    def hess(x):
        a, b, c, d = x
        return -np.array([[0, c * d, b * d, b * c],
                          [c * d, 0, a * d, a * c],
                          [b * d, a * d, 0, a * b],
                          [b * c, a * c, a * b, 0]], dtype=float)

    def chess(x):
        H = np.zeros((3, 4, 4))
        H[0, 0, 0], H[0, 1, 1] = 6 * x[0], 2.0
        H[1, 0, 0] = 2 * x[3]
        H[1, 0, 3] = H[1, 3, 0] = 2 * x[0]
        H[2, 3, 3] = 2.0
        return H

    return _make(
        "HS40",
        lambda x: -np.prod(x),
        grad,
        hess,
        lambda x: np.array([x[0] ** 3 + x[1] ** 2 - 1, x[0] ** 2 * x[3] - x[2], x[3] ** 2 - x[1]]),
        lambda x: np.array([[3 * x[0] ** 2, 2 * x[1], 0, 0],
                            [2 * x[0] * x[3], 0, -1, x[0] ** 2],
                            [0, -1, 0, 2 * x[3]]]),
        chess,
        [0.8, 0.8, 0.8, 0.8],
        [2 ** (-1 / 3), 2 ** (-1 / 2), 2 ** (-11 / 12), 2 ** (-1 / 4)],
    )


def hs42():
    target = np.arange(1.0, 5.0)
    return _make(
        "HS42",
        lambda x: float(np.sum((x - target) ** 2)),
        lambda x: 2 * (x - target),
        lambda x: 2 * np.eye(4),
        lambda x: np.array([x[0] - 2, x[2] ** 2 + x[3] ** 2 - 2]),
        lambda x: np.array([[1.0, 0, 0, 0], [0, 0, 2 * x[2], 2 * x[3]]]),
        lambda x: _diag3([0.0, 0, 0, 0], [0.0, 0, 2, 2]),
        [1.0, 1, 1, 1],
        [2.0, 2, 0.6 * SQ2, 0.8 * SQ2],
    )


def _prod_grad(x):
    xs = x.tolist()
    return np.array([math.prod(xs[:i] + xs[i + 1:]) for i in range(len(xs))])


def _prod_hess(x):
    xs = x.tolist()
    d = len(xs)
    H = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            H[i, j] = H[j, i] = math.prod(v for t, v in enumerate(xs) if t != i and t != j)
    return H


def hs78():
    def chess(x):
        H = np.zeros((3, 5, 5))
        H[0] = 2 * np.eye(5)
        H[1, 1, 2] = H[1, 2, 1] = 1.0
        H[1, 3, 4] = H[1, 4, 3] = -5.0
        H[2, 0, 0], H[2, 1, 1] = 6 * x[0], 6 * x[1]
        return H

    return _make(
        "HS78",
        lambda x: float(np.prod(x)),
        _prod_grad,
        _prod_hess,
        lambda x: np.array([x @ x - 10, x[1] * x[2] - 5 * x[3] * x[4], x[0] ** 3 + x[1] ** 3 + 1]),
        lambda x: np.array([2 * x,
                            [0, x[2], x[1], -5 * x[4], -5 * x[3]],
                            [3 * x[0] ** 2, 3 * x[1] ** 2, 0, 0, 0]]),
        chess,
        [-2.0, 1.5, 2, -1, -1],
        [-1.71714357039438, 1.59570969018355, 1.82724575292719, -0.76364307818413,
         -0.76364307818413],
    )


def hs79():
    def f(x):
        return ((x[0] - 1) ** 2 + (x[0] - x[1]) ** 2 + (x[1] - x[2]) ** 2
                + (x[2] - x[3]) ** 4 + (x[3] - x[4]) ** 4)

    def grad(x):
        a, b = 4 * (x[2] - x[3]) ** 3, 4 * (x[3] - x[4]) ** 3
        return np.array([
            2 * (x[0] - 1) + 2 * (x[0] - x[1]),
            -2 * (x[0] - x[1]) + 2 * (x[1] - x[2]),
            -2 * (x[1] - x[2]) + a,
            -a + b,
            -b,
        ])

    def hess(x):
        p, q = 12 * (x[2] - x[3]) ** 2, 12 * (x[3] - x[4]) ** 2
        return np.array([[4.0, -2, 0, 0, 0],
                         [-2, 4, -2, 0, 0],
                         [0, -2, 2 + p, -p, 0],
                         [0, 0, -p, p + q, -q],
                         [0, 0, 0, -q, q]])

    def chess(x):
        H = np.zeros((3, 5, 5))
        H[0, 1, 1], H[0, 2, 2] = 2.0, 6 * x[2]
        H[1, 2, 2] = -2.0
        H[2, 0, 4] = H[2, 4, 0] = 1.0
        return H

    return _make(
        "HS79",
        f, grad, hess,
        lambda x: np.array([x[0] + x[1] ** 2 + x[2] ** 3 - 2 - 3 * SQ2,
                            x[1] - x[2] ** 2 + x[3] + 2 - 2 * SQ2,
                            x[0] * x[4] - 2]),
        lambda x: np.array([[1, 2 * x[1], 3 * x[2] ** 2, 0, 0],
                            [0, 1, -2 * x[2], 1, 0],
                            [x[4], 0, 0, 0, x[0]]], dtype=float),
        chess,
        [2.0, 2, 2, 2, 2],
        [1.19112745631105, 1.36260316496174, 1.47281793151209, 1.63501661916799,
         1.67908143616641],
    )


def quadratic_problem(name, Q, b, A, a, x0=None):
    """``min 1/2 x'Qx - b'x  s.t.  Ax = a``."""
    Q, b, A, a = (np.asarray(v, dtype=float) for v in (Q, b, A, a))
    d, m = Q.shape[0], A.shape[0]
    x0 = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    K = np.block([[Q, A.T], [A, np.zeros((m, m))]])
    sol = np.linalg.solve(K, np.concatenate([b, a]))[:d]
    zeros = np.zeros((m, d, d))
    return _make(
        name,
        lambda x: float(0.5 * x @ Q @ x - b @ x),
        lambda x: Q @ x - b,
        lambda x: Q.copy(),
        lambda x: A @ x - a,
        lambda x: A.copy(),
        lambda x: zeros.copy(),
        x0,
        sol,
    )


def qp1():
    d = 5
    Q = 4 * np.eye(d) - np.eye(d, k=1) - np.eye(d, k=-1)
    b = np.arange(1.0, d + 1)
    A = np.array([[1.0, 1, 1, 1, 1], [1, -1, 0, 2, 0]])
    a = np.array([1.0, 0.5])
    return quadratic_problem("QP1", Q, b, A, a, x0=np.ones(d))


def qp2():
    rng = np.random.default_rng(20230601)
    d, m = 10, 3
    R = rng.standard_normal((d, d))
    Q = R @ R.T / d + np.eye(d)
    b = rng.standard_normal(d)
    A = rng.standard_normal((m, d))
    a = rng.standard_normal(m)
    return quadratic_problem("QP2", Q, b, A, a, x0=np.ones(d))


_REGISTRY = {
    "BT4": bt4, "BT5": bt5, "BT9": bt9, "HS39": hs39, "MARATOS": maratos,
    "HS40": hs40, "HS42": hs42, "HS78": hs78, "HS79": hs79,
    "QP1": qp1, "QP2": qp2,
}
NONLINEAR_PROBLEMS = ("BT4", "BT5", "BT9", "HS39", "MARATOS", "HS40", "HS42", "HS78", "HS79")
QUADRATIC_PROBLEMS = ("QP1", "QP2")
PROBLEM_NAMES = tuple(_REGISTRY)


def make_hs_problem(name) -> ProblemInstance:
    try:
        return _REGISTRY[name.upper()]()
    except KeyError:
        raise ConfigurationError(
            f"unknown problem {name!r}; available: {', '.join(PROBLEM_NAMES)}"
        ) from None
