import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import optimize

from invglm import l1study
from invglm.l1study import (L1StudyConfig, l1_cost, l1_expected_abs, mse_omega, omega_star,
                            run_l1_mse_experiment)


def mixture_abs_mc(omega, mu, sigma, draws=1_000_000, seed=0):
    gen = np.random.default_rng(seed)
    centre = np.where(gen.random(draws) < 0.5, -mu, mu)
    return np.abs(centre + abs(omega) * sigma * gen.standard_normal(draws)).mean()


def golden_argmin(f, lo=-3.0, hi=3.0):
    return optimize.minimize_scalar(f, bracket=(lo, 0.5 * (lo + hi), hi), method="golden", tol=1e-10).x


def test_mse_omega_examples():
    assert mse_omega(1, 0) == 1
    assert mse_omega(1, 0.5) == pytest.approx(0.5)


def test_mse_omega_matches_grid_search():
    n, theta_diff, sigma = 400, 1.0, 0.6
    x = l1study.centered_classes(n)
    e = np.tile([1.0, 1.0, -1.0, -1.0], n // 4) * sigma
    y = theta_diff * x + e
    grid = np.asarray(L1StudyConfig().omega_grid)
    crit = [np.sum((x - w * y) ** 2) for w in grid]
    step = grid[1] - grid[0]
    assert abs(grid[int(np.argmin(crit))] - mse_omega(theta_diff, sigma)) <= step


def test_l1_centred():
    assert l1_expected_abs(1.5, 0.0, 0.8) == pytest.approx(1.5 * 0.8 * math.sqrt(2 / math.pi))


def test_l1_saturates():
    assert l1_expected_abs(0.1, 50.0, 0.3) == pytest.approx(50.0, rel=1e-12)
    assert l1_expected_abs(0.0, -2.0, 1.0) == 2.0


@pytest.mark.parametrize("seed", range(4))
def test_l1_monte_carlo(seed):
    gen = np.random.default_rng(100 + seed)
    w, mu, s = gen.uniform(0.2, 2.0), gen.uniform(-1.5, 1.5), gen.uniform(0.2, 2.0)
    assert l1_expected_abs(w, mu, s) == pytest.approx(mixture_abs_mc(w, mu, s, seed=seed), rel=0.005)


@given(st.floats(1e-3, 10), st.booleans(), st.floats(0, 5))
def test_omega_star_is_mse_solution(theta_diff, negative, sigma):
    theta_diff = -theta_diff if negative else theta_diff
    assert omega_star(theta_diff, sigma).value == mse_omega(theta_diff, sigma)


def test_omega_star_near_l1_minimizer():
    w = golden_argmin(lambda v: l1_cost(v, 1.0, 0.1))
    assert abs(w - omega_star(1.0, 0.1).value) <= 0.05


def test_omega_star_flagged_unreliable():
    o = omega_star(1.0, 2.0)
    assert o.ratio == pytest.approx(2 * math.sqrt(2), abs=0.01)
    assert not o.reliable


@pytest.mark.parametrize("sigma", [0.1, 0.5, 1.0, 2.0])
def test_argmin_invariant_to_constant_factor(sigma):
    def printed(w):
        # the form printed with |omega| sigma / sqrt(2) in front
        mu = (w - 1.0) / 2.0
        s = abs(w) * sigma
        return abs(mu) / 2 if s == 0 else s / math.sqrt(2) * l1study._g(mu / (math.sqrt(2) * s))

    a = golden_argmin(lambda w: l1_cost(w, 1.0, sigma))
    b = golden_argmin(printed)
    assert a == pytest.approx(b, abs=1e-6)


def test_mse_omega_approaches_target_from_below():
    vals = [mse_omega(2.0, s) for s in (1.0, 0.5, 0.1, 0.01, 0.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert vals[-1] == 0.5


def test_experiment_noiseless_and_deterministic():
    cfg = L1StudyConfig(n=40, trials=5, sigma_grid=(0.0, 1.0))
    rows = run_l1_mse_experiment(cfg, seed=3)
    assert rows[0].l1_error <= 1e-10 and rows[0].mse_error <= 1e-10
    assert rows == run_l1_mse_experiment(cfg, seed=3)


def test_empirical_mse_converges():
    theta_diff, sigma, trials = 1.0, 0.5, 400
    cfg = L1StudyConfig(n=2000, trials=trials, theta_diff=theta_diff, sigma_grid=(sigma,))
    x = l1study.centered_classes(cfg.n)
    ws = []
    for t in range(trials):
        gen = l1study.rng.stream(0, l1study.rng.L1_TRIAL, t)
        e = sigma * gen.standard_normal(cfg.n)
        e -= e.mean()
        ws.append(l1study.fit_omega_mse(x, theta_diff * x + e))
    se = np.std(ws, ddof=1) / math.sqrt(trials)
    assert abs(np.mean(ws) - mse_omega(theta_diff, sigma)) <= 2 * se


def test_config_validation():
    with pytest.raises(l1study.ConfigError):
        L1StudyConfig(n=7)
