"""Counter-based random streams.

Every random draw in the package comes from ``stream(seed, purpose, index)``:
a Philox4x64 generator keyed by the run seed and a (purpose, index) spawn key.
Work item ``index`` therefore sees the same numbers no matter which worker
runs it or in which order.
"""
import numpy as np

# purpose tags; keep values stable, they are part of the reproducibility contract
OBSERVATION_NOISE = 0
NOISE_COVARIANCE = 1
PERMUTATION = 2
L1_TRIAL = 3
FIELD = 4
GROUP_SUBJECT = 5


def stream(seed: int, purpose: int, index: int = 0) -> np.random.Generator:
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=(int(purpose), int(index)))
    return np.random.Generator(np.random.Philox(ss))
