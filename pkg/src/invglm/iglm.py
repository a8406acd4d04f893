"""Inverse GLM: regress each design column on the observations and map back.

Each column is fitted as ``x_c ~ y * omega_c + b_c``. The weight row ``omega``
and bias row ``b`` then give GLM-space parameters
``theta~ = omega^t (omega omega^t)^{-1}`` and estimated observations
``y_est = (X - B) theta~`` with ``B`` the bias row repeated N times.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import (DegenerateVariance, InvGlmError, NotBinaryDesign,
                     ShapeMismatch, ZeroNorm)
from .model import DesignMatrix, GlmEstimate, Method, NoiseKind, NoiseModel, validate
from .svr import SvrModel, svr_fit

ZERO_NORM_TOL = 1e-14


class Regressor(str, enum.Enum):
    LS = "LS"
    SVR = "SVR"


@dataclass(frozen=True)
class SvrHyper:
    """SVR settings for the per-column fits.

    With ``standardize`` the target column is z-scored before fitting and the
    weight and bias are mapped back to raw units afterwards; C and epsilon act
    on the standardized scale. With ``mean_loss`` the box constraint becomes
    ``C / N``, i.e. C weighs the mean rather than the sum of the losses.
    """

    C: float = 1.0
    epsilon: float = 0.1
    standardize: bool = True
    mean_loss: bool = False

    def box(self, n: int) -> float:
        return self.C / n if self.mean_loss else self.C


@dataclass
class InverseFit:
    omega: np.ndarray
    biases: np.ndarray
    regressor: Regressor
    svr_models: Optional[list] = None


@dataclass
class Reconstruction:
    theta_tilde: np.ndarray
    y_est: np.ndarray
    clamp_applied: bool
    lambda_mix: np.ndarray
    theta_est: np.ndarray = field(default=None)
    scale_raw: float = float("nan")
    rescale: float = 1.0


class ColumnFitError(InvGlmError):
    def __init__(self, column, cause):
        super().__init__(f"column {column}: {cause}")
        self.column = column
        self.cause = cause


def _ls_column(y, x):
    yc = y - y.mean()
    syy = float(yc @ yc)
    if syy <= 0:
        raise DegenerateVariance("observations are constant")
    omega = float(yc @ (x - x.mean())) / syy
    return omega, float(x.mean() - omega * y.mean())


def _svr_column(y, x, hyper: SvrHyper):
    mu, sd = (float(x.mean()), float(x.std())) if hyper.standardize else (0.0, 1.0)
    if sd == 0:
        mu, sd = 0.0, 1.0
    model = svr_fit(y, (x - mu) / sd, hyper.box(y.shape[0]), hyper.epsilon)
    return float(model.w[0]) * sd, model.b * sd + mu, model


def fit_inverse(design: DesignMatrix, obs, regressor=Regressor.LS,
                hyper: Optional[SvrHyper] = None) -> InverseFit:
    """One simple regression of every design column on the observation vector."""
    y = np.asarray(obs, dtype=np.float64)
    validate(design, y)
    regressor = Regressor(regressor)
    hyper = hyper or SvrHyper()
    m = design.m
    omega, biases = np.empty(m), np.empty(m)
    models = [] if regressor is Regressor.SVR else None
    for c in range(m):
        x = design.matrix[:, c]
        try:
            if regressor is Regressor.LS:
                omega[c], biases[c] = _ls_column(y, x)
            else:
                omega[c], biases[c], model = _svr_column(y, x, hyper)
                models.append(model)
        except InvGlmError as exc:
            raise ColumnFitError(c, exc) from exc
    return InverseFit(omega, biases, regressor, models)


def reconstruct(fit: InverseFit, design: DesignMatrix, lambda_mix=None,
                obs=None, rescale: bool = False) -> Reconstruction:
    """Map an inverse fit back to GLM parameters and estimated observations.

    The scalar ``s = (omega omega^t)^{-1}`` is clamped into [-1, 1]. Covariate
    columns (those not declared conditions) have their components scaled by
    ``lambda_mix`` (one value in [0, 1] per covariate, default 1) before
    ``y_est = (X - B) theta_est`` is formed.

    With ``rescale=True`` and ``obs`` given, ``theta`` and ``y_est`` are further
    multiplied by the scalar ``k`` minimising ``|y - k y_est|``; the clamp and
    the per-column biases otherwise prevent an exact round trip.
    """
    omega = np.asarray(fit.omega, dtype=np.float64)
    if omega.shape[0] != design.m or fit.biases.shape[0] != design.m:
        raise ShapeMismatch(f"fit has {omega.shape[0]} columns, design has {design.m}")
    norm = float(omega @ omega)
    if norm < ZERO_NORM_TOL:
        raise ZeroNorm(f"omega omega^t = {norm:.3e}; the inverse fit is uninformative")
    s_raw = 1.0 / norm
    s = min(max(s_raw, -1.0), 1.0)
    theta = omega * s

    covs = list(design.covariate_columns)
    if lambda_mix is None:
        lam = np.ones(len(covs))
    else:
        lam = np.atleast_1d(np.asarray(lambda_mix, dtype=np.float64))
        if lam.shape[0] != len(covs):
            raise ShapeMismatch(f"{lam.shape[0]} mixing weights for {len(covs)} covariate columns")
        if np.any((lam < 0) | (lam > 1)):
            raise ValueError("mixing weights must lie in [0, 1]")
    theta_est = theta.copy()
    theta_est[covs] *= lam

    x_adj = design.matrix - fit.biases[None, :]
    y_est = x_adj @ theta_est
    k = 1.0
    if rescale:
        if obs is None:
            raise ValueError("rescale needs the observations")
        y = np.asarray(obs, dtype=np.float64)
        den = float(y_est @ y_est)
        if den > 0:
            k = float(y_est @ y) / den
        theta, theta_est, y_est = k * theta, k * theta_est, k * y_est
    return Reconstruction(theta, y_est, s != s_raw, lam, theta_est, s_raw, k)


def classify(fit: InverseFit, design: DesignMatrix, obs) -> np.ndarray:
    """Labels from the task-condition weight: 1 where ``omega_task (y - mean y) > 0``."""
    if len(design.conditions) != 2:
        raise NotBinaryDesign(f"classification needs two condition columns, got {len(design.conditions)}")
    y = np.asarray(obs, dtype=np.float64)
    if y.shape[0] != design.n:
        raise ShapeMismatch("observation length differs from the design")
    w_task = fit.omega[design.conditions[0]]
    return (w_task * (y - y.mean()) > 0).astype(np.int8)


def forward_covariance(design: DesignMatrix, obs, noise: Optional[NoiseModel] = None,
                       reml_lambdas=None) -> np.ndarray:
    """``(X^t C^-1 X)^-1`` under the noise model the forward GLM would use.

    Without a known covariance the i.i.d. OLS form ``s^2 (X^t X)^-1`` is used,
    with ``s^2`` from the forward OLS residuals.
    """
    from . import glm

    if noise is not None and noise.kind is NoiseKind.KNOWN:
        return glm.ml_fit(design, obs, noise).theta_cov
    if noise is not None and noise.kind is NoiseKind.COMPONENTS:
        return glm.reml_fit(design, obs, noise).estimate.theta_cov
    return glm.ols_fit(design, obs).theta_cov


def inverse_estimate(design: DesignMatrix, obs, regressor=Regressor.LS,
                     hyper: Optional[SvrHyper] = None, noise: Optional[NoiseModel] = None,
                     lambda_mix=None, rescale: bool = False) -> GlmEstimate:
    """Inverse fit expressed as a GlmEstimate so the T statistic can be reused.

    ``theta`` is ``theta_est`` from :func:`reconstruct`; the covariance comes
    from the forward model (see :func:`forward_covariance`); residuals are
    ``y - y_est``.
    """
    y = np.asarray(obs, dtype=np.float64)
    regressor = Regressor(regressor)
    fit = fit_inverse(design, y, regressor, hyper)
    rec = reconstruct(fit, design, lambda_mix, obs=y, rescale=rescale)
    cov = forward_covariance(design, y, noise)
    method = Method.LS_IGLM if regressor is Regressor.LS else Method.SVR_IGLM
    return GlmEstimate(rec.theta_est, cov, y - rec.y_est, method,
                       extras={"fit": fit, "reconstruction": rec})
