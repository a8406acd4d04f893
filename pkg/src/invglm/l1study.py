"""Squared-error versus absolute-error inverse regression in the centered two-class model.

Model: ``y = x (theta_1 - theta_2) + e`` with ``x`` a balanced +-1/2 class
vector. The inverse fit ``x ~ omega y`` should approach ``1 / (theta_1 - theta_2)``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import optimize, special

from . import rng
from .errors import ConfigError, Degenerate
from .svgplot import Figure

RELIABLE_RATIO = 0.5
GOLDEN_TOL = 1e-6


@dataclass(frozen=True)
class L1StudyConfig:
    n: int = 100
    trials: int = 100
    theta_diff: float = 1.0
    sigma_grid: tuple = tuple(np.round(np.linspace(0.0, 2.0, 21), 10))
    omega_grid: tuple = tuple(np.linspace(-2.0, 2.0, 801))

    def __post_init__(self):
        if int(self.n) < 2 or int(self.n) % 2:
            raise ConfigError("n", "must be even and at least 2")
        if int(self.trials) < 1:
            raise ConfigError("trials", "must be at least 1")
        if self.theta_diff == 0 or not math.isfinite(self.theta_diff):
            raise ConfigError("theta_diff", "must be finite and non-zero")
        for name in ("sigma_grid", "omega_grid"):
            g = np.asarray(getattr(self, name), float)
            if g.size == 0 or np.any(np.diff(g) < 0):
                raise ConfigError(name, "must be non-empty and sorted")
        if np.any(np.asarray(self.sigma_grid) < 0):
            raise ConfigError("sigma_grid", "noise levels must be non-negative")


def mse_omega(theta_diff: float, sigma: float) -> float:
    """``(theta_1 - theta_2) / ((theta_1 - theta_2)^2 + 4 sigma^2)``."""
    den = theta_diff * theta_diff + 4.0 * sigma * sigma
    if den == 0:
        raise Degenerate("theta_diff and sigma are both zero")
    return theta_diff / den


def _g(a):
    return np.exp(-a * a) / math.sqrt(math.pi) + a * special.erf(a)


def l1_expected_abs(omega: float, mu: float, sigma: float) -> float:
    """``E|e|`` for ``e ~ 0.5 N(-mu, omega^2 sigma^2) + 0.5 N(mu, omega^2 sigma^2)``.

    Equals ``sqrt(2) |omega| sigma g(mu / (sqrt(2) |omega| sigma))`` with
    ``g(a) = exp(-a^2)/sqrt(pi) + a erf(a)``; ``|mu|`` when the spread vanishes.
    """
    s = abs(omega) * sigma
    if s == 0:
        return abs(mu)
    return float(math.sqrt(2.0) * s * _g(mu / (math.sqrt(2.0) * s)))


def l1_cost(omega: float, theta_diff: float, sigma: float) -> float:
    """Asymptotic L1 criterion as a function of ``omega`` (``mu = (v - 1)/2``, ``v = theta_diff omega``)."""
    return l1_expected_abs(omega, (theta_diff * omega - 1.0) / 2.0, sigma)


@dataclass(frozen=True)
class OmegaStar:
    value: float
    ratio: float
    reliable: bool


def omega_star(theta_diff: float, sigma: float) -> OmegaStar:
    """First-order approximation of the L1 optimum plus its validity ratio ``sqrt(2) sigma / |theta_diff|``."""
    if theta_diff == 0:
        raise Degenerate("theta_diff must be non-zero")
    ratio = math.sqrt(2.0) * sigma / abs(theta_diff)
    return OmegaStar(mse_omega(theta_diff, sigma), ratio, ratio < RELIABLE_RATIO)


def centered_classes(n: int) -> np.ndarray:
    return np.repeat([0.5, -0.5], n // 2)


def fit_omega_mse(x, y) -> float:
    yy = float(y @ y)
    return float(x @ y) / yy if yy > 0 else 0.0


def fit_omega_l1(x, y, theta_diff: float) -> float:
    """Minimise ``sum |x - omega y|`` by golden section, then snap to the best breakpoint.

    The cost is convex piecewise linear with kinks at ``x_i / y_i``; after the
    search the kink with the lowest cost near the bracket is returned so the
    answer is exact rather than tolerance-limited.
    """
    half = 10.0 / abs(theta_diff)

    def cost(w):
        return float(np.abs(x - w * y).sum())

    res = optimize.minimize_scalar(cost, bounds=(-half, half), method="bounded",
                                   options={"xatol": GOLDEN_TOL})
    w = float(res.x)
    nz = y != 0
    if not nz.any():
        return w
    kinks = x[nz] / y[nz]
    near = kinks[np.abs(kinks - w) <= 10 * GOLDEN_TOL + 1e-12]
    cands = np.append(near, w) if near.size else np.append(kinks[np.argsort(np.abs(kinks - w))[:2]], w)
    costs = [cost(c) for c in cands]
    return float(cands[int(np.argmin(costs))])


@dataclass
class L1Row:
    sigma: float
    l1_error: float
    mse_error: float
    l1_omega: float
    mse_omega: float


def run_l1_mse_experiment(config: L1StudyConfig = L1StudyConfig(), seed: int = 0) -> list:
    """Mean absolute errors ``|omega_hat - 1/theta_diff|`` per noise level."""
    x = centered_classes(int(config.n))
    target = 1.0 / config.theta_diff
    rows = []
    for j, sigma in enumerate(config.sigma_grid):
        w1s = np.empty(config.trials)
        w2s = np.empty(config.trials)
        for t in range(int(config.trials)):
            gen = rng.stream(seed, rng.L1_TRIAL, j * (1 << 24) + t)
            eps = sigma * gen.standard_normal(x.size)
            eps -= eps.mean()
            y = x * config.theta_diff + eps
            w2s[t] = fit_omega_mse(x, y)
            w1s[t] = fit_omega_l1(x, y, config.theta_diff)
        e1 = np.abs(w1s - target)
        e2 = np.abs(w2s - target)
        rows.append(L1Row(float(sigma), float(e1.mean()), float(e2.mean()),
                          float(w1s.mean()), float(w2s.mean())))
    return rows


def write_table(rows, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sigma", "l1_error", "mse_error", "l1_omega", "mse_omega"])
        for r in rows:
            w.writerow([repr(r.sigma), repr(r.l1_error), repr(r.mse_error), repr(r.l1_omega), repr(r.mse_omega)])


def plot_table(rows, path) -> None:
    s = [r.sigma for r in rows]
    fig = Figure("Absolute error of the inverse weight", "noise std", "mean |omega - 1/(theta1 - theta2)|")
    fig.line(s, [r.l1_error for r in rows], "L1", "#c0392b")
    fig.line(s, [r.mse_error for r in rows], "MSE", "#2471a3")
    fig.save(path)
