"""Condition-label permutation test on a contrast of GLM parameters."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .. import rng
from ..errors import InvGlmError
from ..methods import MethodOptions, fit_method
from ..model import DesignMatrix, Method

log = logging.getLogger(__name__)

HIST_BINS = 64


@dataclass
class PermutationResult:
    observed: float
    null_samples: np.ndarray
    p_value: float
    K: int
    seed: int
    method: str = ""
    failures: int = 0

    def to_dict(self) -> dict:
        finite = self.null_samples[np.isfinite(self.null_samples)]
        if finite.size:
            counts, edges = np.histogram(finite, bins=HIST_BINS)
        else:
            counts, edges = np.zeros(HIST_BINS, dtype=int), np.linspace(0, 1, HIST_BINS + 1)
        return {
            "method": self.method,
            "observed": self.observed,
            "p": self.p_value,
            "K": self.K,
            "seed": self.seed,
            "failures": self.failures,
            "null_histogram": {"edges": edges.tolist(), "counts": counts.astype(int).tolist()},
        }


def permutation_p(observed: float, null) -> float:
    null = np.asarray(null, dtype=np.float64)
    return (1 + int(np.count_nonzero(null >= observed))) / (null.size + 1)


def permutation_indices(n: int, seed: int, k: int) -> np.ndarray:
    """Row order for permutation ``k``; depends only on (seed, k)."""
    return rng.stream(seed, rng.PERMUTATION, k).permutation(n)


def _contrast_value(design, obs, method, contrast, options):
    return float(contrast @ fit_method(design, obs, method, options).theta)


def _run_chunk(design, obs, method, contrast, options, seed, ks):
    out = np.empty(len(ks))
    failed = 0
    for j, k in enumerate(ks):
        perm = permutation_indices(design.n, seed, k)
        try:
            out[j] = _contrast_value(design.permute_conditions(perm), obs, method, contrast, options)
        except InvGlmError:
            out[j] = np.inf
            failed += 1
    return out, failed


def permutation_test(design: DesignMatrix, obs, method, contrast, K: int = 1000, seed: int = 0,
                     options: Optional[MethodOptions] = None, workers: int = 1) -> PermutationResult:
    """One-sided permutation p-value for ``c^t theta``.

    Rows of the condition columns are permuted jointly; covariates stay with
    the observations. A permutation whose fit fails enters the null as +inf.
    """
    if int(K) < 1:
        raise ValueError("K must be at least 1")
    if not design.conditions:
        raise ValueError("design declares no condition columns to permute")
    method = Method.parse(method)
    c = np.asarray(contrast, dtype=np.float64)
    y = np.asarray(obs, dtype=np.float64)
    observed = _contrast_value(design, y, method, c, options)
    ks = list(range(int(K)))
    if workers > 1 and K > 1:
        chunks = [ks[i::workers] for i in range(workers)]
        null = np.empty(K)
        failures = 0
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_run_chunk, design, y, method, c, options, seed, ch) for ch in chunks]
            for ch, fut in zip(chunks, futs):
                vals, f = fut.result()
                null[ch] = vals
                failures += f
    else:
        null, failures = _run_chunk(design, y, method, c, options, seed, ks)
    if failures:
        log.warning("%d of %d permutations failed to fit and count as +inf", failures, K)
    return PermutationResult(observed, null, permutation_p(observed, null), int(K), int(seed),
                             method.value, failures)
