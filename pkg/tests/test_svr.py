import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from invglm.errors import DimensionMismatch, NonFinite
from invglm.svr import (SvrModel, bias_from_margin, dual_objective, kkt_violations,
                        primal_objective, svr_fit, svr_predict)
from oracles import svr_dual_pg, svr_primal_1d


def instance(seed, n=8):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=n)
    return y, 1.5 * y + rng.normal(scale=0.7, size=n)


def test_constant_target_inside_tube():
    y = np.linspace(-1, 1, 6)
    m = svr_fit(y, np.full(6, 0.5), C=1.0, epsilon=0.1)
    assert m.w[0] == pytest.approx(0.0, abs=1e-9)
    assert m.b == pytest.approx(0.5, abs=1e-9)


def test_exact_interpolant():
    y = np.linspace(-2, 2, 9)
    m = svr_fit(y, 2 * y, C=1e6, epsilon=0.0)
    assert m.w[0] == pytest.approx(2.0, abs=1e-4)
    assert m.b == pytest.approx(0.0, abs=1e-4)


@pytest.mark.parametrize("seed", range(10))
def test_matches_dual_oracle(seed):
    y, x = instance(seed)
    m = svr_fit(y, x, C=1.0, epsilon=0.05)
    _, f_oracle, _ = svr_dual_pg(y, x, 1.0, 0.05)
    w_oracle, _ = svr_primal_1d(y, x, 1.0, 0.05)
    assert dual_objective(y, x, m.alphas, 0.05) == pytest.approx(f_oracle, abs=1e-6)
    assert m.w[0] == pytest.approx(w_oracle, abs=1e-5)


@pytest.mark.parametrize("seed", range(10))
def test_bias_matches_oracle(seed):
    y, x = instance(100 + seed)
    m = svr_fit(y, x, C=1.0, epsilon=0.05)
    if not m.free_mask().any():
        pytest.skip("no free support vector; bias not pinned by the oracle")
    _, _, b_oracle = svr_dual_pg(y, x, 1.0, 0.05)
    assert m.b == pytest.approx(b_oracle, abs=1e-5)


def test_strong_duality():
    y, x = instance(7, n=12)
    m = svr_fit(y, x, C=2.0, epsilon=0.1)
    assert dual_objective(y, x, m.alphas, 0.1) == pytest.approx(-primal_objective(y, x, m.w, m.b, 2.0, 0.1),
                                                                 abs=1e-6)


def test_predict_examples():
    assert svr_predict(SvrModel(np.zeros(1), 3.0, np.zeros(2), 1.0, 0.1), [7.0]) == pytest.approx(3.0)
    assert svr_predict(SvrModel(np.array([2.0]), 0.0, np.zeros(2), 1.0, 0.1), [3.0]) == pytest.approx(6.0)
    with pytest.raises(DimensionMismatch):
        svr_predict(SvrModel(np.array([2.0, 1.0]), 0.0, np.zeros(2), 1.0, 0.1), [3.0, 1.0, 0.0])


def test_free_vectors_on_tube_edge():
    y, x = instance(3, n=30)
    m = svr_fit(y, x, C=1.0, epsilon=0.2)
    free = m.free_mask()
    assert free.any()
    err = np.abs(svr_predict(m, y[:, None]) - x)
    assert np.all(err[free] <= 0.2 + 1e-6)


def test_bias_single_free_vector():
    assert bias_from_margin([[1.0]], [1.0], [0.4], 0.0, [0.5], C=1.0) == pytest.approx(0.6)


def test_bias_symmetric_data():
    y = np.array([-2.0, -1.0, 1.0, 2.0])
    m = svr_fit(y, y, C=0.5, epsilon=0.1)
    assert m.b == pytest.approx(0.0, abs=1e-8)


def test_ols_limit_on_linear_data():
    y = np.linspace(-1, 3, 15)
    m = svr_fit(y, -0.7 * y + 2.0, C=1e6, epsilon=0.0)
    assert m.w[0] == pytest.approx(-0.7, abs=1e-4)


def test_rejects_bad_input():
    with pytest.raises(NonFinite):
        svr_fit([0.0, np.nan, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        svr_fit([0.0], [1.0])
    with pytest.raises(ValueError):
        svr_fit([0.0, 1.0], [1.0, 2.0], C=-1.0)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 40), st.floats(0.05, 20), st.floats(0.0, 0.5))
def test_kkt_and_feasibility(seed, n, C, eps):
    rng = np.random.default_rng(seed)
    y = rng.normal(size=(n, 2))
    x = y @ [1.0, -0.5] + rng.normal(size=n)
    m = svr_fit(y, x, C=C, epsilon=eps)
    assert np.all(np.abs(m.alphas) <= C * (1 + 1e-12))
    assert abs(m.alphas.sum()) <= 1e-9 * C * n
    assert np.allclose(m.w, y.T @ m.alphas)
    assert kkt_violations(m, y, x).max() <= 1e-6 * C
    # never worse than the flat predictor at the target mean
    assert primal_objective(y, x, m.w, m.b, C, eps) <= primal_objective(y, x, np.zeros(2), x.mean(), C, eps) + 1e-9


def test_small_C_shrinks_weight():
    y, x = instance(5, n=40)
    w = [abs(svr_fit(y, x, C=c, epsilon=0.1).w[0]) for c in (1e-3, 1e-2, 1e-1, 1.0)]
    assert all(a <= b + 1e-12 for a, b in zip(w, w[1:]))
