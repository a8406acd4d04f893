"""Binary masks from NIfTI volumes or JSON voxel lists."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import ShapeMismatch
from .nifti import read_volume

MASK_LEVEL = 0.5


def load_mask(path, dims: Optional[tuple] = None) -> np.ndarray:
    """Boolean mask.

    A ``.json`` file is either a list of ``[i, j, k]`` triples (``dims`` must
    be given) or ``{"dims": [...], "voxels": [[i, j, k], ...]}``. Any other
    file is read as NIfTI and thresholded at > 0.5.
    """
    path = Path(path)
    if path.suffix.lower() == ".json":
        spec = json.loads(path.read_text())
        if isinstance(spec, dict):
            dims = tuple(spec.get("dims", dims) or ())
            voxels = spec.get("voxels", [])
        else:
            voxels = spec
        if not dims or len(dims) != 3:
            raise ShapeMismatch(f"{path}: mask dims unknown; give them in the file or by argument")
        m = np.zeros(tuple(int(d) for d in dims), bool)
        idx = np.asarray(voxels, dtype=int).reshape(-1, 3)
        if idx.size and (np.any(idx < 0) or np.any(idx >= np.array(m.shape))):
            raise ShapeMismatch(f"{path}: voxel index outside dims {m.shape}")
        m[tuple(idx.T)] = True
        return m
    vol = read_volume(path)
    data = vol.data if vol.data.ndim == 3 else vol.data[..., 0]
    m = np.asarray(data) > MASK_LEVEL
    if dims is not None and m.shape != tuple(dims):
        raise ShapeMismatch(f"{path}: mask shape {m.shape} differs from {tuple(dims)}")
    return m


def mask_to_json(mask) -> dict:
    m = np.asarray(mask, bool)
    return {"dims": list(m.shape), "voxels": np.argwhere(m).tolist()}
