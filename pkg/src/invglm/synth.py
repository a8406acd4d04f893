"""Synthetic fMRI-like time series: block design, habituation covariate, CNR-scaled noise."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy import ndimage, stats

from . import rng
from .errors import ConfigError, InvalidSampling
from .model import ColumnRole, DesignMatrix

CNR_CAP = 1e12
REST_MODES = ("complement", "indicator")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generator settings.

    ``rest`` selects the second column: ``"complement"`` (default) is one minus
    the convolved task regressor, ``"indicator"`` the raw unconvolved rest
    boxcar.
    """

    n: int = 1000
    block_len: int = 10
    cnr: float = 1.0
    cv: float = 1.0
    theta: Optional[tuple] = None
    seed: int = 0
    dt: float = 1.0
    rest: str = "complement"

    def __post_init__(self):
        if int(self.block_len) < 1:
            raise ConfigError("block_len", "must be at least 1")
        if int(self.n) < 4 * int(self.block_len):
            raise ConfigError("n", f"must be at least 4 * block_len = {4 * self.block_len}")
        if not (np.isfinite(self.cnr) and self.cnr > 0):
            raise ConfigError("cnr", "must be a positive finite number")
        if not self.dt > 0:
            raise ConfigError("dt", "must be positive")
        if self.rest not in REST_MODES:
            raise ConfigError("rest", f"must be one of {REST_MODES}")
        if self.theta is not None and len(self.theta) != 3:
            raise ConfigError("theta", "needs three entries [task, rest, covariate]")
        if not 0 <= int(self.seed) < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")

    @property
    def true_theta(self) -> np.ndarray:
        return np.asarray(self.theta if self.theta is not None else (1.0, 0.0, self.cv), dtype=np.float64)


@dataclass
class SyntheticDataset:
    design: DesignMatrix
    obs: np.ndarray
    clean: np.ndarray
    noise_sigma2: float
    spec: SyntheticSpec = field(default=None)


def canonical_hrf(dt: float = 1.0, duration: float = 32.0) -> np.ndarray:
    """Double-gamma response sampled every ``dt`` seconds, peak scaled to 1.

    Peak shape 6, undershoot shape 16, unit scales, undershoot ratio 1/6.
    """
    if not dt > 0 or not duration >= 16.0:
        raise InvalidSampling(f"need dt > 0 and duration >= 16 s, got dt={dt}, duration={duration}")
    t = np.arange(0.0, duration + 0.5 * dt, dt)
    h = stats.gamma.pdf(t, 6.0) - stats.gamma.pdf(t, 16.0) / 6.0
    return h / h.max()


def block_boxcar(n: int, block_len: int) -> np.ndarray:
    """Alternating rest/task blocks, rest first; 1 marks task scans."""
    return ((np.arange(n) // block_len) % 2 == 1).astype(np.float64)


def habituation(n: int) -> np.ndarray:
    """``f(t) = (1 - t/N)^0.5`` for t = 0..N-1."""
    return np.sqrt(1.0 - np.arange(n) / n)


def make_design(spec: SyntheticSpec, boxcar=None) -> DesignMatrix:
    """``[task, rest, covariate]`` design; the first two columns are the conditions.

    The task column is the boxcar convolved with the HRF, rescaled to max 1 (all
    zeros if there are no task scans).
    """
    n = int(spec.n)
    box = block_boxcar(n, int(spec.block_len)) if boxcar is None else np.asarray(boxcar, dtype=np.float64)
    if box.shape != (n,):
        raise ConfigError("boxcar", f"length {box.shape} differs from n={n}")
    task = np.convolve(box, canonical_hrf(spec.dt))[:n]
    peak = np.max(np.abs(task))
    if peak > 0:
        task = task / peak
    rest = 1.0 - task if spec.rest == "complement" else 1.0 - box
    x = np.column_stack([task, rest, habituation(n)])
    roles = (ColumnRole.COVARIATE,) * 3
    return DesignMatrix(x, roles, ("task", "rest", "covariate"), (0, 1))


def add_noise(clean, cnr: float, seed: int, signal_var: Optional[float] = None, index: int = 0):
    """Return ``(obs, sigma2)`` with ``sigma2 = var(clean) / cnr`` (population variance)."""
    clean = np.asarray(clean, dtype=np.float64)
    var = float(np.var(clean)) if signal_var is None else float(signal_var)
    sigma2 = var / min(float(cnr), CNR_CAP)
    noise = rng.stream(seed, rng.OBSERVATION_NOISE, index).standard_normal(clean.shape[0])
    return clean + np.sqrt(sigma2) * noise, sigma2


def simulate(spec: SyntheticSpec) -> SyntheticDataset:
    design = make_design(spec)
    clean = design.matrix @ spec.true_theta
    obs, sigma2 = add_noise(clean, spec.cnr, spec.seed)
    return SyntheticDataset(design, obs, clean, sigma2, spec)


def estimate_noise_cov(spec: SyntheticSpec, realizations: int = 100,
                       sigma2: Optional[float] = None) -> np.ndarray:
    """Average of ``realizations`` outer products of fresh noise vectors, ridged.

    The ridge ``1e-8 tr(C)/N`` keeps the rank-deficient average invertible.
    """
    if int(realizations) < 1:
        raise ConfigError("realizations", "must be at least 1")
    n = int(spec.n)
    if sigma2 is None:
        clean = make_design(spec).matrix @ spec.true_theta
        sigma2 = float(np.var(clean)) / min(float(spec.cnr), CNR_CAP)
    gen = rng.stream(spec.seed, rng.NOISE_COVARIANCE)
    v = np.sqrt(sigma2) * gen.standard_normal((int(realizations), n))
    c = v.T @ v / realizations
    ridge = 1e-8 * np.trace(c) / n
    if ridge <= 0:
        ridge = 1e-8
    c[np.diag_indices(n)] += ridge
    return c


def write_csv(ds: SyntheticDataset, path) -> None:
    x = ds.design.matrix
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "task", "rest", "covariate", "clean", "obs"])
        for i in range(ds.design.n):
            w.writerow([i, *(repr(float(v)) for v in (x[i, 0], x[i, 1], x[i, 2], ds.clean[i], ds.obs[i]))])


@dataclass(frozen=True)
class GroupVolumeSpec:
    """Two groups of subjects on a 3-D grid; group 0 carries a spherical activation."""

    shape: tuple = (16, 16, 16)
    n_per_group: int = 50
    radius: float = 4.0
    effect: float = 1.0
    baseline: float = 0.0
    fwhm: float = 3.0
    seed: int = 0

    def __post_init__(self):
        if len(self.shape) != 3 or any(int(s) < 1 for s in self.shape):
            raise ConfigError("shape", "needs three positive sizes")
        if int(self.n_per_group) < 2:
            raise ConfigError("n_per_group", "must be at least 2")
        if not self.fwhm >= 0:
            raise ConfigError("fwhm", "must be non-negative")


def blob_mask(shape, radius) -> np.ndarray:
    grid = np.indices(shape, dtype=np.float64)
    centre = (np.asarray(shape, dtype=np.float64) - 1) / 2
    d2 = sum((g - c) ** 2 for g, c in zip(grid, centre))
    return d2 <= radius * radius


def smooth_noise(gen: np.random.Generator, shape, fwhm: float) -> np.ndarray:
    """Unit-variance white noise smoothed by a Gaussian kernel of the given FWHM (voxels)."""
    if fwhm <= 0:
        return gen.standard_normal(shape)
    sd = fwhm / np.sqrt(8 * np.log(2))
    pad = int(np.ceil(4 * sd))
    big = gen.standard_normal(tuple(s + 2 * pad for s in shape))
    sm = ndimage.gaussian_filter(big, sd, mode="constant")
    sm = sm[tuple(slice(pad, pad + s) for s in shape)]
    # variance of the smoothed field from the discrete kernel
    k = np.zeros(2 * pad + 1)
    k[pad] = 1.0
    k1 = ndimage.gaussian_filter1d(k, sd, mode="constant")
    return sm / float(np.sum(k1 * k1)) ** 1.5


def group_volume(spec: GroupVolumeSpec):
    """Return ``(data, groups, blob)``: data is (x, y, z, subjects), group 0 first."""
    shape = tuple(int(s) for s in spec.shape)
    n = 2 * int(spec.n_per_group)
    groups = np.repeat([0, 1], int(spec.n_per_group))
    blob = blob_mask(shape, spec.radius)
    data = np.empty((*shape, n))
    for s in range(n):
        gen = rng.stream(spec.seed, rng.GROUP_SUBJECT, s)
        data[..., s] = spec.baseline + smooth_noise(gen, shape, spec.fwhm)
        if groups[s] == 0:
            data[..., s] += spec.effect * blob
    return data, groups, blob
