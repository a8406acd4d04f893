"""Monte Carlo check of voxelwise FWE control on smooth Gaussian null fields."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import rng
from ..synth import smooth_noise
from .rft import FieldType, RftSpec, rft_voxel_threshold
from .smoothness import resel_counts


@dataclass
class FwerResult:
    threshold: float
    fwer: float
    n_fields: int
    exceed: int
    maxima: np.ndarray


def _maxima(shape, fwhm, seed, indices):
    return np.array([smooth_noise(rng.stream(seed, rng.FIELD, i), shape, fwhm).max() for i in indices])


def field_maxima(shape=(32, 32, 32), fwhm: float = 3.0, n_fields: int = 2000, seed: int = 0,
                 workers: int = 1) -> np.ndarray:
    """Maximum of each of ``n_fields`` unit-variance smoothed fields; field i uses stream (seed, i)."""
    idx = list(range(int(n_fields)))
    if workers <= 1:
        return _maxima(shape, fwhm, seed, idx)
    chunks = [idx[k::workers] for k in range(workers)]
    out = np.empty(len(idx))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        for ch, vals in zip(chunks, ex.map(_maxima, [shape] * workers, [fwhm] * workers,
                                           [seed] * workers, chunks)):
            out[ch] = vals
    return out


def simulate_fwer(shape=(32, 32, 32), fwhm: float = 3.0, alpha: float = 0.05, n_fields: int = 2000,
                  seed: int = 0, workers: int = 1) -> FwerResult:
    """Empirical familywise error of the Gaussian RFT threshold for a solid box search region."""
    mask = np.ones(shape, bool)
    spec = RftSpec(tuple(resel_counts(mask, (fwhm,) * 3)), field_type=FieldType.GAUSSIAN,
                   n_voxels=int(mask.sum()))
    u = rft_voxel_threshold(spec, alpha)
    mx = field_maxima(shape, fwhm, n_fields, seed, workers)
    k = int(np.count_nonzero(mx > u))
    return FwerResult(u, k / len(mx), len(mx), k, mx)
