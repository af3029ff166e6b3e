import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from conftest import random_full_rank
from trstosqp import geometry
from trstosqp.errors import ContractViolation, RankDeficiencyError


def test_factor_of_single_row():
    fac = geometry.factorize(np.array([[1.0, 0.0]]))
    assert_allclose(fac.gram_chol, [[1.0]])


def test_factor_of_diagonal_rows():
    fac = geometry.factorize(np.array([[1.0, 0, 0], [0, 2.0, 0]]))
    assert_allclose(fac.gram_chol, np.diag([1.0, 2.0]))


def test_rank_deficient_rejected():
    with pytest.raises(RankDeficiencyError):
        geometry.factorize(np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0]]))


def test_square_jacobian_rejected():
    # the [[1,1],[1,1]] example is square, which already violates m < d
    with pytest.raises(ContractViolation):
        geometry.factorize(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_ill_conditioned_rejected():
    with pytest.raises(RankDeficiencyError):
        geometry.factorize(np.array([[1.0, 0.0, 0.0], [1.0, 1e-7, 0.0]]))


def test_nonfinite_rejected():
    with pytest.raises(RankDeficiencyError):
        geometry.factorize(np.array([[np.nan, 1.0, 0.0]]))


def test_projection_examples():
    fac = geometry.factorize(np.array([[1.0, 0.0]]))
    assert_allclose(geometry.project_null(fac, np.array([3.0, 4.0])), [0.0, 4.0])
    assert_allclose(geometry.project_null(fac, np.array([0.0, 5.0])), [0.0, 5.0])


def test_normal_direction_examples():
    fac = geometry.factorize(np.array([[1.0, 0.0]]))
    assert_allclose(geometry.normal_direction(fac, np.array([2.0])), [-2.0, 0.0])
    assert_allclose(geometry.normal_direction(fac, np.zeros(1)), [0.0, 0.0])


def test_multiplier_examples():
    fac = geometry.factorize(np.array([[1.0, 0.0]]))
    lam = geometry.ls_multiplier(fac, np.array([3.0, 4.0]))
    assert_allclose(lam, [-3.0])
    assert_allclose(np.array([3.0, 4.0]) + fac.G.T @ lam, [0.0, 4.0])
    assert_allclose(geometry.ls_multiplier(fac, np.array([0.0, 1.0])), [0.0], atol=0)


def test_identity_cache_is_read_only():
    eye = geometry.identity(3)
    assert eye is geometry.identity(3)
    with pytest.raises(ValueError):
        eye[0, 0] = 2.0


@given(seed=st.integers(0, 2**32 - 1), m=st.integers(1, 5), extra=st.integers(1, 7))
def test_projection_properties(seed, m, extra):
    rng = np.random.default_rng(seed)
    d = m + extra
    G = random_full_rank(rng, m, d)
    fac = geometry.factorize(G)
    y = rng.standard_normal(d)
    c = rng.standard_normal(m)
    Py = geometry.project_null(fac, y)
    ny = np.linalg.norm(y)
    assert np.linalg.norm(G @ Py) <= 1e-10 * ny
    assert np.linalg.norm(geometry.project_null(fac, Py) - Py) <= 1e-10 * ny
    v = geometry.normal_direction(fac, c)
    assert np.linalg.norm(G @ v + c) <= 1e-10 * np.linalg.norm(c)
    lam = geometry.ls_multiplier(fac, y)
    assert np.linalg.norm(Py - (y + G.T @ lam)) <= 1e-10 * ny
    assert abs(v @ Py) <= 1e-10 * np.linalg.norm(v) * np.linalg.norm(Py) + 1e-300
    P = geometry.projector(fac)
    assert_allclose(P @ y, Py, atol=1e-10 * ny)


def test_random_5x12_projection(rng):
    G = random_full_rank(rng, 5, 12)
    fac = geometry.factorize(G)
    y = rng.standard_normal(12)
    Py = geometry.project_null(fac, y)
    assert np.linalg.norm(G @ Py) <= 1e-10 * np.linalg.norm(y)


def test_jacobian_norm_and_smallest_singular_value(rng):
    for m in (1, 3):
        G = random_full_rank(rng, m, 6)
        fac = geometry.factorize(G)
        s = np.linalg.svd(G, compute_uv=False)
        assert geometry.jacobian_norm(fac) == pytest.approx(s[0], rel=1e-12)
        assert geometry.smallest_singular_value(fac) == pytest.approx(s[-1], rel=1e-8)
