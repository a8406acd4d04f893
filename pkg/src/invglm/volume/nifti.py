"""Minimal single-file NIfTI-1 reader/writer (little-endian, float32 or int16)."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import (BadMagic, ShapeMismatch, TruncatedFile, UnsupportedByteOrder,
                      UnsupportedDatatype)

HEADER_SIZE = 348
VOX_OFFSET = 352
MAGIC = b"n+1\x00"
DT_INT16 = 4
DT_FLOAT32 = 16
_DTYPES = {DT_INT16: np.dtype("<i2"), DT_FLOAT32: np.dtype("<f4")}

# field name, struct code; order and sizes follow the 348-byte NIfTI-1 header
_FIELDS = [
    ("sizeof_hdr", "i"), ("data_type", "10s"), ("db_name", "18s"), ("extents", "i"),
    ("session_error", "h"), ("regular", "c"), ("dim_info", "B"), ("dim", "8h"),
    ("intent_p1", "f"), ("intent_p2", "f"), ("intent_p3", "f"), ("intent_code", "h"),
    ("datatype", "h"), ("bitpix", "h"), ("slice_start", "h"), ("pixdim", "8f"),
    ("vox_offset", "f"), ("scl_slope", "f"), ("scl_inter", "f"), ("slice_end", "h"),
    ("slice_code", "B"), ("xyzt_units", "B"), ("cal_max", "f"), ("cal_min", "f"),
    ("slice_duration", "f"), ("toffset", "f"), ("glmax", "i"), ("glmin", "i"),
    ("descrip", "80s"), ("aux_file", "24s"), ("qform_code", "h"), ("sform_code", "h"),
    ("quatern_b", "f"), ("quatern_c", "f"), ("quatern_d", "f"),
    ("qoffset_x", "f"), ("qoffset_y", "f"), ("qoffset_z", "f"),
    ("srow_x", "4f"), ("srow_y", "4f"), ("srow_z", "4f"),
    ("intent_name", "16s"), ("magic", "4s"),
]
_FMT = "<" + "".join(code for _, code in _FIELDS)
assert struct.calcsize(_FMT) == HEADER_SIZE


@dataclass
class Volume:
    """3-D grid, or 4-D with subjects on the last axis; axis 0 varies fastest on disk."""

    data: np.ndarray
    voxel_size: tuple = (1.0, 1.0, 1.0)

    def __post_init__(self):
        d = np.asarray(self.data)
        if d.ndim not in (3, 4):
            raise ShapeMismatch(f"volume data must be 3-D or 4-D, got shape {d.shape}")
        self.data = d
        vs = tuple(float(v) for v in self.voxel_size)
        if len(vs) != 3:
            raise ShapeMismatch("voxel_size needs three entries")
        self.voxel_size = vs

    @property
    def dims(self) -> tuple:
        return tuple(self.data.shape[:3])

    @property
    def subject_axis(self) -> Optional[int]:
        return self.data.shape[3] if self.data.ndim == 4 else None


def _pack(values: dict) -> bytes:
    flat = []
    for name, code in _FIELDS:
        v = values[name]
        if code[0].isdigit() and not code.endswith("s"):
            flat.extend(v)
        else:
            flat.append(v)
    return struct.pack(_FMT, *flat)


def _unpack(raw: bytes) -> dict:
    flat = list(struct.unpack(_FMT, raw))
    out, i = {}, 0
    for name, code in _FIELDS:
        if code[0].isdigit() and not code.endswith("s"):
            n = int(code[:-1])
            out[name] = tuple(flat[i:i + n])
            i += n
        else:
            out[name] = flat[i]
            i += 1
    return out


def make_header(shape, voxel_size, datatype=DT_FLOAT32, scl_slope=1.0, scl_inter=0.0) -> bytes:
    if datatype not in _DTYPES:
        raise UnsupportedDatatype(f"datatype {datatype} is not supported")
    if any(int(s) < 1 for s in shape):
        raise ShapeMismatch(f"dims must be positive, got {tuple(shape)}")
    dim = [len(shape), *[int(s) for s in shape]] + [1] * (7 - len(shape))
    vx, vy, vz = (float(v) for v in voxel_size)
    pixdim = (1.0, vx, vy, vz, 1.0, 1.0, 1.0, 1.0)
    h = {name: 0 for name, _ in _FIELDS}
    h.update(
        sizeof_hdr=HEADER_SIZE, data_type=b"", db_name=b"", regular=b"r", dim=tuple(dim),
        intent_p1=0.0, intent_p2=0.0, intent_p3=0.0, datatype=datatype,
        bitpix=_DTYPES[datatype].itemsize * 8, pixdim=pixdim, vox_offset=float(VOX_OFFSET),
        scl_slope=float(scl_slope), scl_inter=float(scl_inter), xyzt_units=2,
        cal_max=0.0, cal_min=0.0, slice_duration=0.0, toffset=0.0, descrip=b"invglm",
        aux_file=b"", sform_code=1, quatern_b=0.0, quatern_c=0.0, quatern_d=0.0,
        qoffset_x=0.0, qoffset_y=0.0, qoffset_z=0.0,
        srow_x=(vx, 0.0, 0.0, 0.0), srow_y=(0.0, vy, 0.0, 0.0), srow_z=(0.0, 0.0, vz, 0.0),
        intent_name=b"", magic=MAGIC,
    )
    return _pack(h)


def write_volume(vol: Volume, path, datatype: int = DT_FLOAT32, scl_slope: float = 1.0,
                 scl_inter: float = 0.0) -> None:
    """Header, four zero extension bytes, then the data in x-fastest order."""
    data = np.asarray(vol.data)
    raw = np.asarray(data, dtype=_DTYPES.get(datatype, np.dtype("<f4")))
    header = make_header(data.shape, vol.voxel_size, datatype, scl_slope, scl_inter)
    with open(Path(path), "wb") as fh:
        fh.write(header)
        fh.write(b"\x00" * (VOX_OFFSET - HEADER_SIZE))
        fh.write(raw.tobytes(order="F"))


def read_header(path) -> dict:
    with open(Path(path), "rb") as fh:
        raw = fh.read(HEADER_SIZE)
    if len(raw) < HEADER_SIZE:
        raise TruncatedFile(f"{path}: header is {len(raw)} bytes, expected {HEADER_SIZE}")
    if struct.unpack("<i", raw[:4])[0] != HEADER_SIZE:
        if struct.unpack(">i", raw[:4])[0] == HEADER_SIZE:
            raise UnsupportedByteOrder(f"{path}: big-endian NIfTI files are not supported")
        raise BadMagic(f"{path}: sizeof_hdr is not {HEADER_SIZE}")
    h = _unpack(raw)
    if h["magic"] != MAGIC:
        raise BadMagic(f"{path}: magic {h['magic']!r} is not {MAGIC!r}")
    return h


def read_volume(path) -> Volume:
    """Read a .nii; float32 data is returned unchanged unless the header asks for scaling."""
    path = Path(path)
    h = read_header(path)
    dt = h["datatype"]
    if dt not in _DTYPES:
        raise UnsupportedDatatype(f"{path}: datatype code {dt} is not float32 (16) or int16 (4)")
    ndim = h["dim"][0]
    if not 1 <= ndim <= 4:
        raise ShapeMismatch(f"{path}: dim[0]={ndim} not supported")
    shape = tuple(int(s) for s in h["dim"][1:1 + ndim]) + (1,) * max(0, 3 - ndim)
    count = int(np.prod(shape))
    offset = int(h["vox_offset"])
    dtype = _DTYPES[dt]
    with open(path, "rb") as fh:
        fh.seek(offset)
        buf = fh.read(count * dtype.itemsize)
    if len(buf) < count * dtype.itemsize:
        raise TruncatedFile(f"{path}: expected {count * dtype.itemsize} data bytes, found {len(buf)}")
    data = np.frombuffer(buf, dtype=dtype).reshape(shape, order="F")
    slope, inter = float(h["scl_slope"]), float(h["scl_inter"])
    scaled = np.isfinite(slope) and slope != 0 and not (slope == 1.0 and inter == 0.0)
    if scaled:
        data = data.astype(np.float64) * slope + inter
    elif dt == DT_INT16:
        data = data.astype(np.float64)
    else:
        data = data.astype(np.float32)
    return Volume(np.ascontiguousarray(data), tuple(h["pixdim"][1:4]))
