"""Raw little-endian f32 arrays with a one-line sidecar header.

``volume.f32`` is accompanied by ``volume.f32.hdr`` holding e.g.
``shape=12,3,32,32 dtype=<f4``.
"""
import os

import numpy as np

from evdiff.errors import ShapeMismatchError

RAW_DTYPE = "<f4"


def header_path(path):
    return f"{path}.hdr"


def write_raw(path, array):
    array = np.asarray(array)
    shape = ",".join(str(dim) for dim in array.shape)
    array.astype(RAW_DTYPE).tofile(path)
    with open(header_path(path), "w") as header:
        header.write(f"shape={shape} dtype={RAW_DTYPE}\n")


def read_header(path):
    hdr = header_path(path)
    if not os.path.exists(hdr):
        raise FileNotFoundError(f"Missing sidecar header: {hdr}")
    with open(hdr) as header:
        fields = dict(item.split("=", 1) for item in header.readline().split())
    if "shape" not in fields:
        raise KeyError(f"No shape in header {hdr}")
    shape = tuple(int(dim) for dim in fields["shape"].split(",") if dim)
    return shape, fields.get("dtype", RAW_DTYPE)


def read_raw(path):
    """Read back as float64; the file stores f32."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"File not found: {path}")
    shape, dtype = read_header(path)
    data = np.fromfile(path, dtype=dtype)
    expected = int(np.prod(shape)) if shape else 1
    if data.size != expected:
        raise ShapeMismatchError(f"{path}: header shape {shape} needs {expected} values, file has {data.size}")
    return data.reshape(shape).astype(np.float64)
