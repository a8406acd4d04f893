import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invglm import glm
from invglm.errors import DegenerateVariance
from invglm.model import ColumnRole, DesignMatrix, NoiseModel, indicator_design
from oracles import gauss_jordan_inverse, normal_equations

COV = ColumnRole.COVARIATE
TWO = indicator_design([0, 0, 1, 1])


def test_identity_design():
    est = glm.ols_fit(DesignMatrix(np.eye(2), (COV, COV)), [3.0, -1.0])
    assert np.allclose(est.theta, [3, -1])


def test_group_means():
    assert np.allclose(glm.ols_fit(TWO, [2.0, 4.0, 6.0, 8.0]).theta, [3, 7])


@pytest.mark.parametrize("seed", range(5))
def test_ols_normal_equations(seed):
    rng = np.random.default_rng(seed)
    x, y = rng.normal(size=(8, 3)), rng.normal(size=8)
    est = glm.ols_fit(DesignMatrix(x, (COV,) * 3), y)
    assert np.max(np.abs(est.theta - normal_equations(x, y))) <= 1e-10


def test_ml_identity_is_ols():
    y = np.array([1.0, 2.5, 6.0, 7.5])
    assert np.allclose(glm.ml_fit(TWO, y, NoiseModel.known(np.eye(4))).theta, glm.ols_fit(TWO, y).theta)


def test_ml_scalar_covariance():
    y = np.array([1.0, 2.5, 6.0, 7.5])
    a = glm.ml_fit(TWO, y, NoiseModel.known(np.eye(4)))
    b = glm.ml_fit(TWO, y, NoiseModel.known(4 * np.eye(4)))
    assert np.allclose(a.theta, b.theta)
    assert np.allclose(b.theta_cov, 4 * a.theta_cov)


def test_ml_weighted_least_squares():
    x = np.array([[1, 0], [1, 0], [0, 1], [0, 1]], float)
    y = np.array([1.0, 3.0, 2.0, 10.0])
    var = np.array([1.0, 1.0, 100.0, 100.0])
    w = np.diag(1 / var)
    oracle = gauss_jordan_inverse(x.T @ w @ x) @ x.T @ w @ y
    est = glm.ml_fit(TWO, y, NoiseModel.known(np.diag(var)))
    assert np.allclose(est.theta, oracle, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_ml_sigma_identity_equals_ols(seed, sigma):
    rng = np.random.default_rng(seed)
    d = DesignMatrix(np.c_[np.ones(12), rng.normal(size=(12, 2))], (COV,) * 3)
    y = rng.normal(size=12)
    ml = glm.ml_fit(d, y, NoiseModel.known(sigma ** 2 * np.eye(12)))
    assert np.allclose(ml.theta, glm.ols_fit(d, y).theta, atol=1e-10)


def test_reml_single_component():
    rng = np.random.default_rng(0)
    d = DesignMatrix(np.c_[np.ones(30), rng.normal(size=30)], (COV, COV))
    y = rng.normal(size=30)
    ols = glm.ols_fit(d, y)
    res = glm.reml_fit(d, y, NoiseModel.from_components([np.eye(30)]))
    assert res.lambdas[0] == pytest.approx(ols.residuals @ ols.residuals / 28, rel=1e-6)
    assert np.allclose(res.estimate.theta, ols.theta)


def test_reml_inflated_block():
    rng = np.random.default_rng(1)
    n = 200
    block = np.zeros(n)
    block[100:] = 1
    d = DesignMatrix(np.c_[np.ones(n), rng.normal(size=n)], (COV, COV))
    y = d.matrix @ [1.0, 2.0] + rng.normal(size=n) * np.where(block > 0, 3.0, 1.0)
    res = glm.reml_fit(d, y, NoiseModel.from_components([np.eye(n), np.diag(block)]))
    assert res.converged
    assert res.lambdas[1] > 0


def test_reml_noiseless_floor():
    rng = np.random.default_rng(2)
    d = DesignMatrix(np.c_[np.ones(20), rng.normal(size=20)], (COV, COV))
    res = glm.reml_fit(d, d.matrix @ [1.0, -1.0], NoiseModel.from_components([np.eye(20)]))
    assert res.lambdas[0] == pytest.approx(glm.LAMBDA_FLOOR)


def test_reml_ar1_components():
    rng = np.random.default_rng(3)
    d = DesignMatrix(np.c_[np.ones(60), rng.normal(size=60)], (COV, COV))
    y = d.matrix @ [0.0, 1.0] + rng.normal(size=60)
    res = glm.reml_fit(d, y, NoiseModel.from_components(glm.ar1_components(60)))
    assert np.all(np.isfinite(res.estimate.theta))


def test_t_null_contrast():
    est = glm.ols_fit(TWO, [1.0, 2.0, 1.0, 2.0])
    assert glm.t_statistic(est, [1, -1]) == pytest.approx(0.0, abs=1e-12)


def test_t_two_sample():
    rng = np.random.default_rng(4)
    a, b = rng.normal(1, 1, 7), rng.normal(0, 1, 9)
    d = indicator_design([0] * 7 + [1] * 9)
    t = glm.t_statistic(glm.ols_fit(d, np.r_[a, b]), [1, -1])
    sp = ((6 * a.var(ddof=1) + 8 * b.var(ddof=1)) / 14)
    assert t == pytest.approx((a.mean() - b.mean()) / np.sqrt(sp * (1 / 7 + 1 / 9)), rel=1e-10)


@given(st.floats(1e-3, 1e3))
def test_t_scale_invariant(k):
    est = glm.ols_fit(TWO, [1.0, 2.5, 6.0, 7.5])
    assert glm.t_statistic(est, [k, -k]) == pytest.approx(glm.t_statistic(est, [1, -1]), rel=1e-10)


def test_t_degenerate():
    est = glm.ols_fit(TWO, [1.0, 1.0, 2.0, 2.0])
    with pytest.raises(DegenerateVariance):
        glm.t_statistic(est, [1, -1])
