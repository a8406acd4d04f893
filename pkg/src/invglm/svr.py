"""Linear epsilon-insensitive support vector regression.

The dual is solved by sequential minimal optimisation on the usual 2N-variable
form (one multiplier for each side of the tube), picking the maximal
KKT-violating pair at every step. Because the kernel is linear the dual gradient
is a function of ``w`` alone, so one iteration costs O(N d) and no gradient
vector has to be kept in sync.

Sign convention: ``beta_i = alpha_i - alpha_i*`` where ``alpha_i`` belongs to
the constraint ``x_i - f(y_i) <= eps + xi_i``. Then ``w = sum_i beta_i y_i`` and
a free support vector with ``beta_i > 0`` sits on the upper tube edge,
``f(y_i) = x_i - eps``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DimensionMismatch, MaxIterations, NonFinite

TAU = 1e-12


@dataclass(frozen=True)
class SvrModel:
    w: np.ndarray
    b: float
    alphas: np.ndarray  # signed dual coefficients beta_i
    C: float
    epsilon: float
    iterations: int = 0
    gap: float = 0.0

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.alphas != 0.0)

    def free_mask(self) -> np.ndarray:
        return free_support_vectors(self.alphas, self.C)


def free_support_vectors(alphas, C) -> np.ndarray:
    a = np.abs(np.asarray(alphas))
    slack = 1e-10 * C
    return (a > slack) & (a < C - slack)


@numba.njit(cache=True)
def _smo(inputs, targets, beta0, C, eps, tol, max_iter):
    # with a linear kernel the dual gradient of every variable is r_i -/+ eps,
    # r_i = x_i - w . y_i, so the selection pass recomputes it from w directly
    n, d = inputs.shape
    alpha = np.maximum(beta0, 0.0)
    alpha_s = np.maximum(-beta0, 0.0)
    w = np.zeros(d)
    for i in range(n):
        for k in range(d):
            w[k] += beta0[i] * inputs[i, k]
    sqn = np.empty(n)
    for i in range(n):
        s = 0.0
        for k in range(d):
            s += inputs[i, k] * inputs[i, k]
        sqn[i] = s
    it = 0
    gap = np.inf
    while it < max_iter:
        gmax = -np.inf
        gmin = np.inf
        bi = -1
        bj = -1
        si = 0
        sj = 0
        for t in range(n):
            r = targets[t]
            for k in range(d):
                r -= w[k] * inputs[t, k]
            v = r - eps
            if alpha[t] < C and v >= gmax:
                gmax = v
                bi = t
                si = 0
            if alpha[t] > 0 and v <= gmin:
                gmin = v
                bj = t
                sj = 0
            v = r + eps
            if alpha_s[t] > 0 and v >= gmax:
                gmax = v
                bi = t
                si = 1
            if alpha_s[t] < C and v <= gmin:
                gmin = v
                bj = t
                sj = 1
        gap = gmax - gmin
        if bi < 0 or bj < 0 or gap < tol:
            break
        it += 1
        # z = +1 for alpha, -1 for alpha*; gradient G = -z * v
        zi = 1.0 if si == 0 else -1.0
        zj = 1.0 if sj == 0 else -1.0
        gi = -zi * gmax
        gj = -zj * gmin
        ai = alpha[bi] if si == 0 else alpha_s[bi]
        aj = alpha[bj] if sj == 0 else alpha_s[bj]
        ai_old = ai
        aj_old = aj
        kij = 0.0
        for k in range(d):
            kij += inputs[bi, k] * inputs[bj, k]
        qij = zi * zj * kij
        if zi != zj:
            quad = sqn[bi] + sqn[bj] + 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (-gi - gj) / quad
            diff = ai - aj
            ai += delta
            aj += delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0:
                    ai = 0.0
                    aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            quad = sqn[bi] + sqn[bj] - 2.0 * qij
            if quad <= 0:
                quad = TAU
            delta = (gi - gj) / quad
            total = ai + aj
            ai -= delta
            aj += delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            else:
                if aj < 0:
                    aj = 0.0
                    ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if ai < 0:
                    ai = 0.0
                    aj = total
        if si == 0:
            alpha[bi] = ai
        else:
            alpha_s[bi] = ai
        if sj == 0:
            alpha[bj] = aj
        else:
            alpha_s[bj] = aj
        di = (ai - ai_old) * zi
        dj = (aj - aj_old) * zj
        for k in range(d):
            w[k] += di * inputs[bi, k] + dj * inputs[bj, k]
    beta = alpha - alpha_s
    return beta, it, gap


def bias_from_margin(inputs, targets, w, epsilon, alphas, C=None) -> float:
    """Bias from the tube-edge equation averaged over free support vectors.

    For a free vector ``f(y_i) = x_i - eps * sign(beta_i)``, so
    ``b = mean(x_i - eps * sign(beta_i) - w . y_i)``. Without free vectors the
    midpoint of the interval of biases compatible with the KKT conditions is
    returned.
    """
    y = np.asarray(inputs, dtype=np.float64).reshape(len(targets), -1)
    x = np.asarray(targets, dtype=np.float64)
    beta = np.asarray(alphas, dtype=np.float64)
    if C is None:
        C = float(np.max(np.abs(beta))) if np.any(beta) else 1.0
    r = x - y @ np.asarray(w, dtype=np.float64)
    free = free_support_vectors(beta, C)
    if np.any(free):
        return float(np.mean(r[free] - epsilon * np.sign(beta[free])))
    slack = 1e-10 * C
    zero = np.abs(beta) <= slack
    upper = beta >= C - slack
    lower = beta <= -C + slack
    lows = np.concatenate([r[zero] - epsilon, r[lower] + epsilon])
    highs = np.concatenate([r[zero] + epsilon, r[upper] - epsilon])
    lb = lows.max() if lows.size else -np.inf
    ub = highs.min() if highs.size else np.inf
    if np.isfinite(lb) and np.isfinite(ub):
        return float(0.5 * (lb + ub))
    return float(lb if np.isfinite(lb) else ub)


def _best_bias(r, eps):
    # sum max(0, |r - b| - eps) is convex piecewise linear in b; its slope
    # changes sign between the N-th and (N+1)-th of the 2N breakpoints r -/+ eps
    n = r.shape[0]
    cand = np.partition(np.concatenate([r - eps, r + eps]), (n - 1, n))
    return 0.5 * (cand[n - 1] + cand[n])


def _warm_start(y, x, C, eps):
    """Feasible dual start from a quick 1-D primal solve (d = 1 only).

    Points outside the tube of the primal estimate start at the bound with the
    matching sign; the larger side is scaled down so that sum(beta) = 0.
    """
    w_ls = np.polyfit(y, x, 1)[0] if np.ptp(y) > 0 else 0.0
    half = 3.0 * abs(w_ls) + 1.0

    def profile(w):
        r = x - w * y
        b = _best_bias(r, eps)
        return 0.5 * w * w + C * np.maximum(np.abs(r - b) - eps, 0.0).sum()

    w = minimize_scalar(profile, bounds=(-half, half), method="bounded",
                        options={"xatol": 1e-10}).x
    r = x - w * y
    r = r - _best_bias(r, eps)
    sign = np.where(r > eps, 1.0, np.where(r < -eps, -1.0, 0.0))
    pos, neg = int((sign > 0).sum()), int((sign < 0).sum())
    beta = np.zeros_like(x)
    if pos and neg:
        if pos >= neg:
            beta[sign > 0], beta[sign < 0] = C * neg / pos, -C
        else:
            beta[sign > 0], beta[sign < 0] = C, -C * pos / neg
    return beta


def svr_fit(inputs, targets, C: float = 1.0, epsilon: float = 0.1,
            tol: float | None = None, max_iter: int | None = None,
            warm_start: bool = True) -> SvrModel:
    """Fit ``x ~ w . y + b`` minimising ``|w|^2 / 2 + C sum |x_i - f(y_i)|_eps``.

    Parameters
    ----------
    inputs : array, shape (N,) or (N, d)
    targets : array, shape (N,)
    C : float
        Box constraint, > 0.
    epsilon : float
        Tube half-width, >= 0.
    tol : float, optional
        Stopping gap between the maximal violating pair; defaults to
        ``1e-6 * min(C, 1)``.
    warm_start : bool
        For one-dimensional inputs, start SMO from the dual point suggested by
        a cheap primal solve. Only the starting point changes; the stopping
        rule and the returned solution are the same up to the tolerance.
    """
    x = np.ascontiguousarray(targets, dtype=np.float64)
    y = np.ascontiguousarray(np.asarray(inputs, dtype=np.float64).reshape(x.shape[0], -1))
    n = x.shape[0]
    if n < 2:
        raise ValueError("svr_fit needs at least two samples")
    if not C > 0 or not epsilon >= 0:
        raise ValueError(f"need C > 0 and epsilon >= 0, got C={C}, epsilon={epsilon}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise NonFinite("svr_fit inputs contain NaN or inf")
    if tol is None:
        tol = 1e-6 * min(C, 1.0)
    if max_iter is None:
        max_iter = 100_000 * n
    beta0 = _warm_start(y[:, 0], x, C, epsilon) if (warm_start and y.shape[1] == 1) else np.zeros(n)
    beta, it, gap = _smo(y, x, beta0, float(C), float(epsilon), float(tol), int(max_iter))
    if gap >= tol and it >= max_iter:
        raise MaxIterations(f"SMO stopped after {it} iterations with KKT gap {gap:.3e}")
    w = beta @ y
    b = bias_from_margin(y, x, w, epsilon, beta, C)
    return SvrModel(w, b, beta, float(C), float(epsilon), int(it), float(gap))


def svr_predict(model: SvrModel, inputs) -> np.ndarray | float:
    """``w . y + b`` for one input vector (scalar result) or a batch of rows."""
    y = np.asarray(inputs, dtype=np.float64)
    d = model.w.shape[0]
    if y.ndim == 0:
        y = y.reshape(1)
    if y.ndim == 1:
        if d == 1 and y.shape[0] != 1:
            return y * model.w[0] + model.b
        if y.shape[0] != d:
            raise DimensionMismatch(f"input has {y.shape[0]} features, model has {d}")
        return float(y @ model.w + model.b)
    if y.shape[1] != d:
        raise DimensionMismatch(f"input has {y.shape[1]} features, model has {d}")
    return y @ model.w + model.b


def dual_objective(inputs, targets, alphas, epsilon) -> float:
    """Dual objective in minimisation form: ``|w|^2/2 - x.beta + eps |beta|_1``."""
    x = np.asarray(targets, dtype=np.float64)
    y = np.asarray(inputs, dtype=np.float64).reshape(x.shape[0], -1)
    beta = np.asarray(alphas, dtype=np.float64)
    w = beta @ y
    return float(0.5 * w @ w - x @ beta + epsilon * np.abs(beta).sum())


def primal_objective(inputs, targets, w, b, C, epsilon) -> float:
    x = np.asarray(targets, dtype=np.float64)
    y = np.asarray(inputs, dtype=np.float64).reshape(x.shape[0], -1)
    w = np.atleast_1d(np.asarray(w, dtype=np.float64))
    loss = np.maximum(np.abs(x - y @ w - b) - epsilon, 0.0)
    return float(0.5 * w @ w + C * loss.sum())


def kkt_violations(model: SvrModel, inputs, targets) -> np.ndarray:
    """Per-sample violation of the primal KKT conditions at the returned (w, b)."""
    x = np.asarray(targets, dtype=np.float64)
    y = np.asarray(inputs, dtype=np.float64).reshape(x.shape[0], -1)
    e = x - (y @ model.w + model.b)
    beta, C, eps = model.alphas, model.C, model.epsilon
    slack = 1e-10 * C
    v = np.empty_like(e)
    zero = np.abs(beta) <= slack
    up = beta >= C - slack
    lo = beta <= -C + slack
    fp = (~zero) & (~up) & (beta > 0)
    fn = (~zero) & (~lo) & (beta < 0)
    v[zero] = np.maximum(np.abs(e[zero]) - eps, 0.0)
    v[up] = np.maximum(eps - e[up], 0.0)
    v[lo] = np.maximum(e[lo] + eps, 0.0)
    v[fp] = np.abs(e[fp] - eps)
    v[fn] = np.abs(e[fn] + eps)
    return v
