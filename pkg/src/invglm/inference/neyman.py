"""Empirical Neyman-Pearson threshold from null-region scores."""
import math

import numpy as np

from ..errors import TooFewScores

MIN_SCORES = 20


def np_threshold(null_scores, alpha: float = 0.05) -> float:
    """Nearest-rank ``(1 - alpha)`` quantile of the null scores."""
    s = np.sort(np.asarray(null_scores, dtype=np.float64).ravel())
    if s.size < MIN_SCORES:
        raise TooFewScores(f"need at least {MIN_SCORES} scores, got {s.size}")
    if not 0 < alpha < 0.5:
        raise ValueError("alpha must lie in (0, 0.5)")
    rank = max(1, math.ceil((1 - alpha) * s.size - 1e-9))
    return float(s[rank - 1])
