from .mapfit import StatMap, map_fit, sequential_map
from .mask import load_mask, mask_to_json
from .nifti import Volume, read_header, read_volume, write_volume

__all__ = ["StatMap", "map_fit", "sequential_map", "load_mask", "mask_to_json",
           "Volume", "read_header", "read_volume", "write_volume"]
