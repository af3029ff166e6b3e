import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from trstosqp.errors import ConfigurationError, ContractViolation
from trstosqp.hessian import AVEH_WINDOW, KINDS, make_strategy, sr1_update


def _feed(strategy, k, H=None, x=None, g=None):
    d = strategy.dim
    strategy.observe(k, x=np.zeros(d) if x is None else x,
                     grad_lag=np.zeros(d) if g is None else g, lag_hess=H)


@pytest.mark.parametrize("kind", KINDS)
def test_first_matrix_is_identity(kind):
    s = make_strategy(kind, 3)
    assert_array_equal(s.produce(0), np.eye(3))


def test_identity_always():
    s = make_strategy("id", 2)
    for k in range(5):
        assert_array_equal(s.produce(k), np.eye(2))
        _feed(s, k)


def test_unknown_kind():
    with pytest.raises(ConfigurationError):
        make_strategy("bfgs", 2)


def test_produce_refuses_to_run_ahead():
    s = make_strategy("esth", 2)
    s.produce(0)
    with pytest.raises(ContractViolation):
        s.produce(1)
    _feed(s, 0, np.eye(2))
    with pytest.raises(ContractViolation):
        _feed(s, 0, np.eye(2))


def test_esth_returns_previous_sample():
    s = make_strategy("esth", 2)
    s.produce(0)
    A = np.array([[2.0, 1.0], [1.0, 3.0]])
    _feed(s, 0, A)
    assert_array_equal(s.produce(1), A)


def test_aveh_mean_of_three():
    rng = np.random.default_rng(0)
    s = make_strategy("aveh", 3)
    mats = []
    for k in range(3):
        s.produce(k)
        A = rng.standard_normal((3, 3))
        A = A + A.T
        mats.append(A)
        _feed(s, k, A)
    assert_allclose(s.produce(3), sum(mats) / 3, rtol=1e-14)


def test_aveh_ring_buffer_matches_brute_force():
    rng = np.random.default_rng(1)
    s = make_strategy("aveh", 2)
    mats = []
    for k in range(3 * AVEH_WINDOW + 17):
        B = s.produce(k)
        if k >= AVEH_WINDOW:
            assert_allclose(B, np.mean(mats[-AVEH_WINDOW:], axis=0), atol=1e-12)
        A = rng.standard_normal((2, 2)) * 100
        A = A + A.T
        mats.append(A)
        _feed(s, k, A)
    assert s.stored().shape == (AVEH_WINDOW, 2, 2)


def test_sr1_skip_on_zero_correction():
    H = np.diag([2.0, 3.0])
    dx = np.array([1.0, 1.0])
    out, skipped = sr1_update(H, dx, H @ dx)
    assert skipped and out is H


def test_sr1_one_step_secant():
    out, skipped = sr1_update(np.eye(2), np.array([1.0, 0.0]), np.array([2.0, 0.0]))
    assert not skipped
    assert_allclose(out, np.diag([2.0, 1.0]))


def test_sr1_secant_condition_and_convergence():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((4, 4))
    T = A @ A.T + np.eye(4)
    H = np.eye(4)
    errs = [np.linalg.norm(H - T)]
    for _ in range(20):
        dx = rng.standard_normal(4)
        y = T @ dx
        H, skipped = sr1_update(H, dx, y)
        if not skipped:
            assert np.linalg.norm(H @ dx - y) <= 1e-8 * np.linalg.norm(y)
        assert_allclose(H, H.T, atol=1e-12)
        errs.append(np.linalg.norm(H - T))
    assert errs[-1] < 1e-6 * errs[0]


def test_sr1_strategy_lags_one_iteration():
    s = make_strategy("sr1", 2)
    T = np.diag([3.0, 1.0])
    xs = [np.zeros(2), np.array([1.0, 0.0]), np.array([1.0, 1.0])]
    for k, x in enumerate(xs):
        s.produce(k)
        _feed(s, k, x=x, g=T @ x)
    # after observing iterations 0..2, H holds both secant pairs
    assert_allclose(s.produce(3), T)
