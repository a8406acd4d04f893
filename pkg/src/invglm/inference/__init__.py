from .neyman import np_threshold
from .permutation import PermutationResult, permutation_p, permutation_test
from .rft import FieldType, RftSpec, ec_densities, expected_ec, rft_voxel_threshold
from .smoothness import Smoothness, estimate_smoothness, resel_counts

__all__ = [
    "np_threshold", "PermutationResult", "permutation_p", "permutation_test",
    "FieldType", "RftSpec", "ec_densities", "expected_ec", "rft_voxel_threshold",
    "Smoothness", "estimate_smoothness", "resel_counts",
]
