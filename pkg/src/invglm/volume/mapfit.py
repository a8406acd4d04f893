"""Voxelwise fitting of a design against a 4-D subject volume."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..errors import AllVoxelsFailed, InvGlmError, ShapeMismatch
from ..glm import t_statistic
from ..methods import MethodOptions, fit_method
from ..model import DesignMatrix, Method
from .nifti import Volume

log = logging.getLogger(__name__)

CHUNK = 256


@dataclass
class StatMap:
    volume: Volume
    statistic: str
    df: float
    mask: np.ndarray
    smoothness: Optional[object] = None
    method: str = ""
    failures: int = 0
    contrast_map: Optional[np.ndarray] = None
    theta_maps: Optional[np.ndarray] = None
    residuals: Optional[np.ndarray] = field(default=None, repr=False)


def _fit_voxels(design, series, method, contrast, options, keep_residuals):
    """Fit each row of ``series``; returns per-voxel T, contrast, theta, residuals, failure flags."""
    k = series.shape[0]
    t = np.full(k, np.nan)
    con = np.full(k, np.nan)
    theta = np.full((k, design.m), np.nan)
    res = np.full((k, design.n), np.nan) if keep_residuals else None
    failed = np.zeros(k, bool)
    for i in range(k):
        try:
            est = fit_method(design, series[i], method, options)
            con[i] = float(contrast @ est.theta)
            theta[i] = est.theta
            if res is not None:
                res[i] = est.residuals
            t[i] = t_statistic(est, contrast)
        except InvGlmError:
            failed[i] = True
    return t, con, theta, res, failed


def map_fit(volumes: Volume, design: DesignMatrix, mask, method, contrast,
            options: Optional[MethodOptions] = None, workers: int = 1,
            keep_residuals: bool = False) -> StatMap:
    """T map of ``contrast`` over the in-mask voxels; NaN outside the mask and where fits fail.

    Voxels are processed in fixed chunks of ``CHUNK`` in-mask voxels so the
    result does not depend on ``workers``.
    """
    data = np.asarray(volumes.data)
    if data.ndim != 4:
        raise ShapeMismatch(f"need a 4-D volume (x, y, z, subjects), got {data.shape}")
    if data.shape[3] != design.n:
        raise ShapeMismatch(f"volume has {data.shape[3]} subjects, design has {design.n} rows")
    m = np.asarray(mask, bool)
    if m.shape != data.shape[:3]:
        raise ShapeMismatch(f"mask {m.shape} does not match volume {data.shape[:3]}")
    method = Method.parse(method)
    c = np.asarray(contrast, dtype=np.float64)
    if c.shape != (design.m,):
        raise ShapeMismatch(f"contrast length {c.size} differs from design columns {design.m}")
    idx = np.flatnonzero(m.ravel(order="F"))
    if idx.size == 0:
        raise AllVoxelsFailed("mask excludes every voxel")
    flat = data.reshape(-1, data.shape[3], order="F")
    series = np.asarray(flat[idx], dtype=np.float64)
    chunks = [slice(s, min(s + CHUNK, idx.size)) for s in range(0, idx.size, CHUNK)]

    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_fit_voxels, *zip(*[(design, series[s], method, c, options, keep_residuals)
                                                    for s in chunks])))
    else:
        parts = [_fit_voxels(design, series[s], method, c, options, keep_residuals) for s in chunks]

    t = np.concatenate([p[0] for p in parts])
    con = np.concatenate([p[1] for p in parts])
    theta = np.concatenate([p[2] for p in parts])
    failed = np.concatenate([p[4] for p in parts])
    n_fail = int(failed.sum())
    if n_fail == idx.size:
        raise AllVoxelsFailed(f"all {idx.size} in-mask voxels failed to fit")
    if n_fail:
        log.warning("%d of %d voxels failed and are set to NaN", n_fail, idx.size)

    nvox = int(np.prod(m.shape))

    def scatter(values, extra=()):
        out = np.full((nvox, *extra), np.nan)
        out[idx] = values
        return out.reshape((*m.shape, *extra), order="F")

    t_map = scatter(t)
    res_map = None
    if keep_residuals:
        res = np.concatenate([p[3] for p in parts])
        res_map = np.moveaxis(scatter(res, (design.n,)), 3, 0)
    return StatMap(Volume(t_map, volumes.voxel_size), "T", float(design.n - design.m), m,
                   method=method.value, failures=n_fail, contrast_map=scatter(con),
                   theta_maps=scatter(theta, (design.m,)), residuals=res_map)


def sequential_map(volumes: Volume, design: DesignMatrix, mask, method, contrast,
                   options: Optional[MethodOptions] = None) -> np.ndarray:
    """Plain triple loop over voxels; reference for :func:`map_fit`."""
    data = np.asarray(volumes.data, dtype=np.float64)
    m = np.asarray(mask, bool)
    c = np.asarray(contrast, dtype=np.float64)
    out = np.full(m.shape, np.nan)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            for k in range(m.shape[2]):
                if not m[i, j, k]:
                    continue
                try:
                    out[i, j, k] = t_statistic(fit_method(design, data[i, j, k], method, options), c)
                except InvGlmError:
                    pass
    return out
