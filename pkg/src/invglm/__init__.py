"""Mass-univariate forward and inverse GLM estimation with permutation and random-field inference."""
from .errors import InvGlmError
from .glm import ml_fit, ols_fit, reml_fit, t_statistic
from .iglm import classify, fit_inverse, reconstruct
from .methods import ALL_METHODS, MethodOptions, fit_method
from .model import ColumnRole, DesignMatrix, GlmEstimate, Method, NoiseModel
from .svr import svr_fit, svr_predict

__version__ = "0.1.0"
