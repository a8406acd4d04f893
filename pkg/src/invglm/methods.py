"""One entry point for all five estimators."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import glm, iglm
from .model import DesignMatrix, GlmEstimate, Method, NoiseKind, NoiseModel

ALL_METHODS = (Method.OLS, Method.ML, Method.REML, Method.LS_IGLM, Method.SVR_IGLM)


@dataclass(frozen=True)
class MethodOptions:
    """Knobs shared by the dispatcher.

    ``ml_noise`` is the known covariance for ML; ``reml_noise`` the component
    basis for ReML (default ``{I}``). Inverse methods take their T covariance
    from ``inverse_noise`` (default: i.i.d. OLS form).
    """

    ml_noise: Optional[NoiseModel] = None
    reml_noise: Optional[NoiseModel] = None
    inverse_noise: Optional[NoiseModel] = None
    svr: iglm.SvrHyper = field(default_factory=iglm.SvrHyper)
    lambda_mix: Optional[tuple] = None
    rescale: bool = False


def fit_method(design: DesignMatrix, obs, method, options: Optional[MethodOptions] = None) -> GlmEstimate:
    method = Method.parse(method)
    opt = options or MethodOptions()
    if method is Method.OLS:
        return glm.ols_fit(design, obs)
    if method is Method.ML:
        noise = opt.ml_noise or NoiseModel.known(np.eye(design.n))
        if noise.kind is not NoiseKind.KNOWN:
            raise ValueError("ML needs a known covariance")
        return glm.ml_fit(design, obs, noise)
    if method is Method.REML:
        noise = opt.reml_noise or NoiseModel.iid()
        return glm.reml_fit(design, obs, noise).estimate
    reg = iglm.Regressor.LS if method is Method.LS_IGLM else iglm.Regressor.SVR
    return iglm.inverse_estimate(design, obs, reg, opt.svr, opt.inverse_noise,
                                 opt.lambda_mix, opt.rescale)
