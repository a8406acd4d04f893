"""Smoothness from residual maps and lattice resel counts."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateMask, EmptyMask, ShapeMismatch

FWHM_FLOOR = 1.0


@dataclass(frozen=True)
class Smoothness:
    fwhm: tuple
    resel_volume: float


def _lag1_correlation(z, mask, axis):
    """Mean lag-1 correlation of normalized residuals along ``axis``.

    ``z`` has unit sum of squares per voxel over maps, so for every in-mask
    neighbour pair ``sum_k (dz)^2 = 2 - 2 rho``.
    """
    sl_a = [slice(None)] * 3
    sl_b = [slice(None)] * 3
    sl_a[axis], sl_b[axis] = slice(None, -1), slice(1, None)
    pair = mask[tuple(sl_a)] & mask[tuple(sl_b)]
    if not pair.any():
        return None
    d = z[(slice(None), *sl_b)] - z[(slice(None), *sl_a)]
    v = float(np.mean(np.sum(d * d, axis=0)[pair]))
    return 1.0 - 0.5 * v


def estimate_smoothness(residual_maps, mask=None) -> Smoothness:
    """Per-axis FWHM (voxels) from the spatial derivative variance of residuals.

    Residuals are scaled to unit sum of squares per voxel; the mean lag-1
    correlation ``rho`` along each axis is inverted under a Gaussian
    autocorrelation, ``FWHM = sqrt(-2 ln 2 / ln rho)``, and floored at one voxel.
    """
    r = np.asarray(residual_maps, dtype=np.float64)
    if r.ndim != 4:
        raise ShapeMismatch(f"residual maps must be (maps, x, y, z), got {r.shape}")
    if r.shape[0] < 2:
        raise ValueError("need at least two residual maps")
    m = np.ones(r.shape[1:], bool) if mask is None else np.asarray(mask, bool)
    if m.shape != r.shape[1:]:
        raise ShapeMismatch(f"mask {m.shape} does not match maps {r.shape[1:]}")
    ss = np.sqrt(np.sum(r * r, axis=0))
    m = m & (ss > 0)
    if not m.any():
        raise DegenerateMask("no voxel with non-zero residuals")
    z = np.where(m, r / np.where(ss > 0, ss, 1.0), 0.0)
    fwhm = []
    for ax in range(3):
        rho = _lag1_correlation(z, m, ax)
        if rho is None:
            if r.shape[1 + ax] == 1:
                fwhm.append(FWHM_FLOOR)
                continue
            raise DegenerateMask(f"no neighbouring in-mask voxels along axis {ax}")
        if rho >= 1.0 - 1e-12:
            raise DegenerateMask(f"zero derivative variance along axis {ax}")
        f = math.sqrt(-2.0 * math.log(2.0) / math.log(rho)) if rho > 0 else 0.0
        fwhm.append(max(f, FWHM_FLOOR))
    return Smoothness(tuple(fwhm), float(m.sum()) / float(np.prod(fwhm)))


def _count(mask, offsets):
    """Number of lattice cells whose corners at the given offsets are all in the mask."""
    nx, ny, nz = mask.shape
    ext = np.max(np.array(offsets), axis=0)
    sub = np.ones((nx - ext[0], ny - ext[1], nz - ext[2]), bool)
    for o in offsets:
        sub &= mask[o[0]:nx - ext[0] + o[0], o[1]:ny - ext[1] + o[1], o[2]:nz - ext[2] + o[2]]
    return int(sub.sum())


def lattice_counts(mask) -> dict:
    m = np.asarray(mask, bool)
    c = {"P": int(m.sum())}
    unit = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}
    for a, u in unit.items():
        c["E" + a] = _count(m, [(0, 0, 0), u])
    for a, b in (("x", "y"), ("x", "z"), ("y", "z")):
        ua, ub = np.array(unit[a]), np.array(unit[b])
        c["F" + a + b] = _count(m, [(0, 0, 0), tuple(ua), tuple(ub), tuple(ua + ub)])
    corners = [(i, j, k) for i in (0, 1) for j in (0, 1) for k in (0, 1)]
    c["C"] = _count(m, corners)
    return c


def resel_counts(mask, fwhm) -> np.ndarray:
    """``[R0, R1, R2, R3]`` of a 3-D mask for per-axis FWHM in voxels."""
    m = np.asarray(mask, bool)
    if m.ndim != 3:
        raise ShapeMismatch(f"mask must be 3-D, got {m.shape}")
    if not m.any():
        raise EmptyMask("mask has no voxels")
    rx, ry, rz = (1.0 / float(f) for f in fwhm)
    c = lattice_counts(m)
    r0 = c["P"] - (c["Ex"] + c["Ey"] + c["Ez"]) + (c["Fxy"] + c["Fxz"] + c["Fyz"]) - c["C"]
    r1 = ((c["Ex"] - c["Fxy"] - c["Fxz"] + c["C"]) * rx
          + (c["Ey"] - c["Fxy"] - c["Fyz"] + c["C"]) * ry
          + (c["Ez"] - c["Fxz"] - c["Fyz"] + c["C"]) * rz)
    r2 = (c["Fxy"] - c["C"]) * rx * ry + (c["Fxz"] - c["C"]) * rx * rz + (c["Fyz"] - c["C"]) * ry * rz
    r3 = c["C"] * rx * ry * rz
    return np.array([float(r0), r1, r2, r3])
