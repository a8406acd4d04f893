"""Random-field-theory voxel thresholds from expected Euler characteristics."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import special, stats

from ..errors import Unsolvable

U_MAX = 50.0
BISECT_TOL = 1e-6
LN4 = 4.0 * math.log(2.0)


class FieldType(str, enum.Enum):
    GAUSSIAN = "Gaussian"
    T = "T"


@dataclass(frozen=True)
class RftSpec:
    resels: tuple
    df: float = math.inf
    field_type: FieldType = FieldType.GAUSSIAN
    n_voxels: Optional[int] = None

    def __post_init__(self):
        r = tuple(float(v) for v in self.resels) + (0.0,) * (4 - len(self.resels))
        if len(r) != 4 or any(v < 0 for v in r) or r[0] < 1:
            raise ValueError(f"resels must be four non-negative values with R0 >= 1, got {self.resels}")
        object.__setattr__(self, "resels", r)
        ft = FieldType(self.field_type)
        object.__setattr__(self, "field_type", ft)
        if ft is FieldType.T and not self.df > 0:
            raise ValueError("T fields need df > 0")


def ec_densities(u: float, field_type=FieldType.GAUSSIAN, df: float = math.inf) -> np.ndarray:
    """EC densities rho_0..rho_3 at threshold ``u`` (per unit resel)."""
    ft = FieldType(field_type)
    if ft is FieldType.GAUSSIAN or not math.isfinite(df):
        e = math.exp(-0.5 * u * u)
        return np.array([
            stats.norm.sf(u),
            math.sqrt(LN4) / (2 * math.pi) * e,
            LN4 / (2 * math.pi) ** 1.5 * u * e,
            LN4 ** 1.5 / (2 * math.pi) ** 2 * (u * u - 1) * e,
        ])
    v = float(df)
    base = (1 + u * u / v) ** (-(v - 1) / 2)
    ratio = math.exp(special.gammaln((v + 1) / 2) - special.gammaln(v / 2)) / math.sqrt(v / 2)
    return np.array([
        stats.t.sf(u, v),
        math.sqrt(LN4) / (2 * math.pi) * base,
        LN4 / (2 * math.pi) ** 1.5 * ratio * u * base,
        LN4 ** 1.5 / (2 * math.pi) ** 2 * ((v - 1) / v * u * u - 1) * base,
    ])


def expected_ec(spec: RftSpec, u: float) -> float:
    return float(np.dot(spec.resels, ec_densities(u, spec.field_type, spec.df)))


def uncorrected_threshold(alpha: float, field_type=FieldType.GAUSSIAN, df: float = math.inf) -> float:
    if FieldType(field_type) is FieldType.GAUSSIAN or not math.isfinite(df):
        return float(stats.norm.isf(alpha))
    return float(stats.t.isf(alpha, df))


def rft_voxel_threshold(spec: RftSpec, alpha: float = 0.05, bonferroni: bool = True) -> float:
    """Smallest ``u`` whose expected EC is at most ``alpha``.

    Solved by bisection between the uncorrected quantile and ``U_MAX``. With
    ``bonferroni`` and a known voxel count the result is capped by the
    Bonferroni threshold.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if expected_ec(spec, U_MAX) > alpha:
        raise Unsolvable(f"expected EC at u={U_MAX} still exceeds alpha={alpha}")
    lo = uncorrected_threshold(alpha, spec.field_type, spec.df)
    hi = U_MAX
    if expected_ec(spec, lo) > alpha:
        while hi - lo > BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if expected_ec(spec, mid) > alpha:
                lo = mid
            else:
                hi = mid
        u = hi
    else:
        u = lo
    if bonferroni and spec.n_voxels:
        u = min(u, uncorrected_threshold(alpha / spec.n_voxels, spec.field_type, spec.df))
    return float(u)
