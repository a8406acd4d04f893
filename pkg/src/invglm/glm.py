"""Forward GLM estimators (OLS, ML with known covariance, ReML) and the contrast T."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (DegenerateVariance, Diverged, NotPositiveDefinite,
                     RankDeficient, ShapeMismatch)
from .model import (DesignMatrix, GlmEstimate, Method, NoiseKind, NoiseModel,
                    validate)

LAMBDA_FLOOR = 1e-12
REML_MAX_ITER = 64
REML_TOL = 1e-6


def _normal_solve(xtx, xty):
    try:
        low = linalg.cholesky(xtx)
    except NotPositiveDefinite as exc:
        raise RankDeficient(str(exc)) from None
    theta = linalg.cho_solve(low, xty)
    cov = linalg.cho_solve(low, np.eye(xtx.shape[0]))
    return theta, 0.5 * (cov + cov.T)


def ols_fit(design: DesignMatrix, obs) -> GlmEstimate:
    """Ordinary least squares with ``Cov = s^2 (X^t X)^{-1}``, ``s^2 = RSS / (N - M)``.

    A square design is solved exactly; ``s^2`` is then NaN.
    """
    y = np.asarray(obs, dtype=np.float64)
    validate(design, y, square_ok=True)
    x = design.matrix
    theta, xtx_inv = _normal_solve(x.T @ x, x.T @ y)
    resid = y - x @ theta
    dof = x.shape[0] - x.shape[1]
    s2 = float(resid @ resid) / dof if dof else float("nan")
    return GlmEstimate(theta, s2 * xtx_inv, resid, Method.OLS, hyper=np.array([s2]))


def ml_fit(design: DesignMatrix, obs, noise: NoiseModel) -> GlmEstimate:
    """Generalised least squares under a known error covariance."""
    if noise.kind is not NoiseKind.KNOWN:
        raise ValueError("ml_fit needs a NoiseModel with a known covariance")
    y = np.asarray(obs, dtype=np.float64)
    validate(design, y)
    x = design.matrix
    if noise.covariance.shape[0] != x.shape[0]:
        raise ShapeMismatch(f"covariance is {noise.covariance.shape}, design has {x.shape[0]} rows")
    low = noise.cholesky
    xw = linalg.whiten(low, x)
    yw = linalg.whiten(low, y)
    theta, cov = _normal_solve(xw.T @ xw, xw.T @ yw)
    return GlmEstimate(theta, cov, y - x @ theta, Method.ML)


@dataclass
class RemlResult:
    estimate: GlmEstimate
    lambdas: np.ndarray
    iterations: int
    converged: bool


def _is_scaled_identity(q: np.ndarray) -> bool:
    d = q[0, 0]
    return d > 0 and np.array_equal(np.diag(q), np.full(q.shape[0], d)) and \
        np.count_nonzero(q - np.diag(np.diag(q))) == 0


def _residual_precision(c_low, x):
    """``P' = C^-1 - C^-1 X (X^t C^-1 X)^-1 X^t C^-1``."""
    n = x.shape[0]
    cinv = linalg.cho_solve(c_low, np.eye(n))
    cinv_x = cinv @ x
    _, xtcx_inv = _normal_solve(x.T @ cinv_x, np.zeros(x.shape[1]))
    return cinv - cinv_x @ xtcx_inv @ cinv_x.T


def reml_fit(design: DesignMatrix, obs, noise: NoiseModel) -> RemlResult:
    """Restricted ML over covariance components ``C = sum_k lambda_k Q_k``.

    Fisher scoring on the component weights, with gradient
    ``g_k = -tr(P'Q_k)/2 + y^t P'Q_k P' y / 2`` and expected information
    ``I_kl = tr(P'Q_k P'Q_l)/2``. Weights are floored at 1e-12; a step that
    leaves ``C`` indefinite is halved up to 30 times before giving up.
    """
    if noise.kind is NoiseKind.IID:
        noise = NoiseModel.from_components([np.eye(design.n)])
    if noise.kind is not NoiseKind.COMPONENTS:
        raise ValueError("reml_fit needs covariance components")
    y = np.asarray(obs, dtype=np.float64)
    validate(design, y)
    x = design.matrix
    n, m = x.shape
    qs = noise.components
    if qs[0].shape[0] != n:
        raise ShapeMismatch(f"components are {qs[0].shape}, design has {n} rows")

    ols = ols_fit(design, y)
    s2 = float(ols.residuals @ ols.residuals) / (n - m)

    if len(qs) == 1 and _is_scaled_identity(qs[0]):
        # one scoring step from any start lands on RSS / (N - M)
        lam = np.array([max(s2 / qs[0][0, 0], LAMBDA_FLOOR)])
        _, xtx_inv = _normal_solve(x.T @ x, x.T @ y)
        est = GlmEstimate(ols.theta, lam[0] * qs[0][0, 0] * xtx_inv, ols.residuals,
                          Method.REML, hyper=lam)
        return RemlResult(est, lam, 1, True)

    # start from the OLS variance spread over the components that carry a diagonal
    traces = np.array([linalg.trace(q) for q in qs])
    if np.any(traces > 0):
        lam = np.where(traces > 0, max(s2, LAMBDA_FLOOR) * n / traces[traces > 0].sum(), LAMBDA_FLOOR)
    else:
        lam = np.full(len(qs), max(s2, LAMBDA_FLOOR))

    def build(lmb):
        return sum(l * q for l, q in zip(lmb, qs))

    try:
        c_low = linalg.cholesky(build(lam))
    except NotPositiveDefinite:
        raise Diverged("initial covariance is not positive definite") from None

    converged = False
    it = 0
    for it in range(1, REML_MAX_ITER + 1):
        p = _residual_precision(c_low, x)
        py = p @ y
        pq = [p @ q for q in qs]
        grad = np.array([-0.5 * np.trace(a) + 0.5 * py @ (q @ py) for a, q in zip(pq, qs)])
        info = np.array([[0.5 * linalg.trace_of_product(a, b) for b in pq] for a in pq])
        step = np.linalg.lstsq(info, grad, rcond=None)[0]
        t = 1.0
        for _ in range(30):
            new = np.maximum(lam + t * step, LAMBDA_FLOOR)
            try:
                new_low = linalg.cholesky(build(new))
                break
            except NotPositiveDefinite:
                t *= 0.5
        else:
            raise Diverged("covariance left the positive-definite cone and backtracking failed")
        delta = np.linalg.norm(new - lam) / max(np.linalg.norm(lam), LAMBDA_FLOOR)
        lam, c_low = new, new_low
        if delta <= REML_TOL:
            converged = True
            break

    est = ml_fit(design, y, NoiseModel.known(build(lam)))
    est.method, est.hyper = Method.REML, lam
    return RemlResult(est, lam, it, converged)


def ar1_components(n: int) -> tuple:
    """``{I, lag-1 band}`` basis for serially correlated noise."""
    band = np.eye(n, k=1) + np.eye(n, k=-1)
    return (np.eye(n), band)


def t_statistic(est: GlmEstimate, contrast) -> float:
    """``T = c^t theta / sqrt(c^t Cov(theta) c)``."""
    c = np.asarray(contrast, dtype=np.float64)
    if c.shape != est.theta.shape:
        raise ShapeMismatch(f"contrast has shape {c.shape}, theta has {est.theta.shape}")
    if not np.any(c):
        raise ValueError("contrast must not be all zeros")
    var = float(c @ est.theta_cov @ c)
    den = np.sqrt(var) if var > 0 else 0.0
    if den <= 1e-14:
        raise DegenerateVariance(f"contrast standard error {den:.3e} too small")
    return float(c @ est.theta) / den
