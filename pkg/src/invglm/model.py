"""Design matrices, noise models and estimate records."""
from __future__ import annotations

import csv
import enum
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import linalg
from .errors import (IndicatorViolation, NotPositiveDefinite, RankDeficient,
                     ShapeMismatch)

RANK_TOL = 1e-10


class ColumnRole(str, enum.Enum):
    INDICATOR = "indicator"
    COVARIATE = "covariate"
    NUISANCE = "nuisance"


class Method(str, enum.Enum):
    OLS = "OLS"
    ML = "ML"
    REML = "ReML"
    LS_IGLM = "LS-iGLM"
    SVR_IGLM = "SVR-iGLM"

    @property
    def is_inverse(self) -> bool:
        return self in (Method.LS_IGLM, Method.SVR_IGLM)

    @classmethod
    def parse(cls, value) -> "Method":
        if isinstance(value, Method):
            return value
        key = str(value).strip().lower()
        for m in cls:
            if m.value.lower() == key or m.name.lower() == key.replace("-", "_"):
                return m
        raise ValueError(f"unknown method {value!r}; expected one of {[m.value for m in cls]}")


@dataclass(frozen=True)
class DesignMatrix:
    """N x M design with per-column roles.

    ``conditions`` lists the columns that encode experimental conditions. They
    are the columns permuted by the permutation test and the ``X_b`` block of
    the model-equivalence split; the remaining columns form ``X_c``. By default
    the indicator-role columns are the conditions, but a convolved (continuous)
    task regressor can be declared a condition while keeping a covariate role.
    """

    matrix: np.ndarray
    roles: tuple
    names: tuple = ()
    conditions: tuple = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ShapeMismatch(f"design must be 2-D, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        roles = tuple(ColumnRole(r) for r in self.roles)
        if len(roles) != m.shape[1]:
            raise ShapeMismatch(f"{len(roles)} roles for {m.shape[1]} columns")
        object.__setattr__(self, "roles", roles)
        names = tuple(self.names) or tuple(f"x{i + 1}" for i in range(m.shape[1]))
        if len(names) != m.shape[1]:
            raise ShapeMismatch(f"{len(names)} names for {m.shape[1]} columns")
        object.__setattr__(self, "names", names)
        conds = tuple(int(c) for c in self.conditions) or tuple(
            i for i, r in enumerate(roles) if r is ColumnRole.INDICATOR)
        if any(c < 0 or c >= m.shape[1] for c in conds):
            raise ShapeMismatch(f"condition columns {conds} out of range")
        object.__setattr__(self, "conditions", conds)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.matrix.shape[1]

    @property
    def indicator_columns(self) -> tuple:
        return tuple(i for i, r in enumerate(self.roles) if r is ColumnRole.INDICATOR)

    @property
    def covariate_columns(self) -> tuple:
        return tuple(i for i in range(self.m) if i not in self.conditions)

    def with_matrix(self, matrix) -> "DesignMatrix":
        return DesignMatrix(matrix, self.roles, self.names, self.conditions)

    def permute_conditions(self, perm) -> "DesignMatrix":
        """Copy with the rows of the condition columns reordered jointly by ``perm``."""
        x = np.array(self.matrix)
        cols = list(self.conditions)
        x[:, cols] = self.matrix[np.asarray(perm)][:, cols]
        return self.with_matrix(x)


def check_rank(x: np.ndarray) -> None:
    gram = x.T @ x
    dmax = float(np.max(np.diag(gram))) if gram.size else 0.0
    if not dmax > 0:
        raise RankDeficient("design has only zero columns")
    try:
        low = linalg.cholesky(gram)
    except NotPositiveDefinite as exc:
        raise RankDeficient(f"X^t X is singular: {exc}") from None
    if np.min(np.diag(low) ** 2) <= RANK_TOL * dmax:
        raise RankDeficient("X^t X pivot below rank tolerance")


def validate(design: DesignMatrix, obs, square_ok: bool = False) -> None:
    """Check the design/observation pair; returns None or raises.

    ``square_ok`` admits N == M (an exactly determined fit with no residual
    degrees of freedom).
    """
    y = np.asarray(obs, dtype=np.float64)
    x = design.matrix
    if y.ndim != 1 or y.shape[0] != x.shape[0]:
        raise ShapeMismatch(f"observation shape {y.shape} does not match design rows {x.shape[0]}")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
        raise ShapeMismatch("non-finite values in design or observations")
    ind = list(design.indicator_columns)
    if ind:
        block = x[:, ind]
        if not np.all((block == 0.0) | (block == 1.0)):
            raise IndicatorViolation("indicator columns must contain only 0 or 1")
        sums = block.sum(axis=1)
        bad = np.flatnonzero(sums != 1.0)
        if bad.size:
            raise IndicatorViolation(
                f"indicator rows must sum to 1; row {int(bad[0])} sums to {sums[bad[0]]:g}")
    if x.shape[0] < x.shape[1] or (x.shape[0] == x.shape[1] and not square_ok):
        raise RankDeficient(f"need N > M, got N={x.shape[0]}, M={x.shape[1]}")
    check_rank(x)


def standardize_columns(x: np.ndarray, columns: Sequence[int]) -> np.ndarray:
    """Zero-mean, unit-SD copies of the given columns (population SD)."""
    out = np.array(x, dtype=np.float64)
    for c in columns:
        sd = out[:, c].std()
        if sd == 0:
            raise RankDeficient(f"column {c} is constant and cannot be standardized")
        out[:, c] = (out[:, c] - out[:, c].mean()) / sd
    return out


def load_design_csv(csv_path, roles_path, standardize: bool = True) -> DesignMatrix:
    """Read a design from a CSV (header = column names) plus a JSON name -> role map.

    The roles file may also carry ``"conditions": [names...]`` to declare
    continuous condition regressors. Covariate columns are standardized unless
    ``standardize`` is False.
    """
    csv_path, roles_path = Path(csv_path), Path(roles_path)
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ShapeMismatch(f"{csv_path} is empty")
    names = [h.strip() for h in rows[0]]
    data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=np.float64)
    spec = json.loads(roles_path.read_text())
    role_map = spec.get("roles", spec)
    try:
        roles = [ColumnRole(role_map[n]) for n in names]
    except KeyError as exc:
        raise ShapeMismatch(f"no role given for column {exc.args[0]!r} in {roles_path}") from None
    conds = [names.index(c) for c in spec.get("conditions", [])] if "roles" in spec else []
    if standardize:
        data = standardize_columns(data, [i for i, r in enumerate(roles) if r is ColumnRole.COVARIATE])
    return DesignMatrix(data, tuple(roles), tuple(names), tuple(conds))


def indicator_design(groups: Sequence[int], n_groups: Optional[int] = None,
                     covariates=None) -> DesignMatrix:
    """Disjoint-class indicator design, optionally with trailing covariate columns."""
    g = np.asarray(groups, dtype=int)
    k = int(n_groups if n_groups is not None else g.max() + 1)
    x = np.zeros((g.size, k))
    x[np.arange(g.size), g] = 1.0
    roles = [ColumnRole.INDICATOR] * k
    if covariates is not None:
        cov = np.asarray(covariates, dtype=np.float64).reshape(g.size, -1)
        x = np.hstack([x, cov])
        roles += [ColumnRole.COVARIATE] * cov.shape[1]
    return DesignMatrix(x, tuple(roles))


class NoiseKind(str, enum.Enum):
    IID = "iid"
    KNOWN = "known"
    COMPONENTS = "components"


@dataclass
class NoiseModel:
    """Error covariance description: i.i.d., a known matrix, or ReML components."""

    kind: NoiseKind = NoiseKind.IID
    covariance: Optional[np.ndarray] = None
    components: tuple = ()

    @classmethod
    def iid(cls) -> "NoiseModel":
        return cls(NoiseKind.IID)

    @classmethod
    def known(cls, covariance) -> "NoiseModel":
        c = linalg.as_matrix(covariance)
        if c.shape[0] != c.shape[1]:
            raise ShapeMismatch(f"covariance must be square, got {c.shape}")
        return cls(NoiseKind.KNOWN, covariance=c)

    @classmethod
    def from_components(cls, components) -> "NoiseModel":
        qs = tuple(linalg.as_matrix(q) for q in components)
        if not qs:
            raise ValueError("at least one covariance component is required")
        for q in qs:
            if q.shape != qs[0].shape or q.shape[0] != q.shape[1]:
                raise ShapeMismatch("components must be square and equally sized")
            if np.max(np.abs(q - q.T)) > linalg.SYMMETRY_TOL:
                raise ValueError("covariance components must be symmetric")
        return cls(NoiseKind.COMPONENTS, components=qs)

    @cached_property
    def cholesky(self) -> np.ndarray:
        """Lower factor of the known covariance, computed once and reused across fits."""
        if self.kind is not NoiseKind.KNOWN:
            raise ValueError("only a known covariance has a Cholesky factor")
        return linalg.cholesky(self.covariance)


@dataclass
class GlmEstimate:
    theta: np.ndarray
    theta_cov: np.ndarray
    residuals: np.ndarray
    method: Method
    hyper: Optional[np.ndarray] = None
    extras: dict = field(default_factory=dict)

    @property
    def df(self) -> int:
        return int(self.residuals.shape[0] - self.theta.shape[0])

    def to_dict(self) -> dict:
        out = {
            "method": self.method.value,
            "theta": self.theta.tolist(),
            "theta_cov": self.theta_cov.tolist(),
            "df": self.df,
            "rss": float(self.residuals @ self.residuals),
        }
        if self.hyper is not None:
            out["hyper"] = np.asarray(self.hyper).tolist()
        return out
