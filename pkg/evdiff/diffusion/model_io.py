"""``E2FM`` container: a flat list of named little-endian f64 arrays.

Layout after the 4-byte magic, repeated per array::

    u32 name length | name (utf-8) | u32 rank | rank x u64 dims | f64 data

Scalars such as the denoiser kind are stored as rank-0 arrays under ``meta.*``.
"""
import os
import struct
from typing import Dict

import numpy as np

from evdiff.diffusion.denoisers import DENOISER_KINDS, ConditionalDenoiser

MODEL_MAGIC = b"E2FM"


def write_arrays(path: str, arrays: Dict[str, np.ndarray]):
    with open(path, "wb") as handle:
        handle.write(MODEL_MAGIC)
        for name, array in arrays.items():
            array = np.asarray(array, dtype="<f8")
            encoded = name.encode("utf-8")
            handle.write(struct.pack("<I", len(encoded)))
            handle.write(encoded)
            handle.write(struct.pack("<I", array.ndim))
            handle.write(struct.pack(f"<{array.ndim}Q", *array.shape))
            handle.write(array.tobytes())


def read_arrays(path: str) -> Dict[str, np.ndarray]:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Model file not found: {path}")
    with open(path, "rb") as handle:
        payload = handle.read()
    if payload[:4] != MODEL_MAGIC:
        raise ValueError(f"{path} is not an E2FM model file")

    arrays, offset = {}, 4
    try:
        while offset < len(payload):
            (name_len,) = struct.unpack_from("<I", payload, offset)
            offset += 4
            name = payload[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<I", payload, offset)
            offset += 4
            shape = struct.unpack_from(f"<{rank}Q", payload, offset)
            offset += 8 * rank
            count = int(np.prod(shape)) if rank else 1
            data = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
            offset += 8 * count
            arrays[name] = data.reshape(shape).astype(np.float64)
    except (struct.error, ValueError) as exc:
        raise ValueError(f"Truncated or corrupt E2FM file {path}: {exc}")
    return arrays


def save_model(model: ConditionalDenoiser, path: str):
    arrays = {
        "meta.kind": np.array(DENOISER_KINDS.index(model.kind), dtype=np.float64),
        "meta.channels": np.array(model.channels, dtype=np.float64),
        "meta.hidden": np.array(model.hidden, dtype=np.float64),
        "meta.sigma_data": np.array(model.sigma_data),
    }
    arrays.update({f"param.{name}": value for name, value in model.params.items()})
    write_arrays(path, arrays)


def load_model(path: str) -> ConditionalDenoiser:
    arrays = read_arrays(path)
    try:
        model = ConditionalDenoiser(
            channels=int(arrays["meta.channels"]),
            kind=DENOISER_KINDS[int(arrays["meta.kind"])],
            hidden=int(arrays["meta.hidden"]),
            sigma_data=float(arrays["meta.sigma_data"]),
        )
    except KeyError as exc:
        raise KeyError(f"Model file {path} lacks metadata {exc}")
    model.params = {name[len("param."):]: value for name, value in arrays.items() if name.startswith("param.")}
    return model
