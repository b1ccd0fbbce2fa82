from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from evdiff.errors import RankDeficientError, ShapeMismatchError
from evdiff.simulator.frames import FrameSequence

DECODER_KINDS = ("identity", "linear")


@dataclass(frozen=True)
class Decoder:
    """Latent -> frame map applied frame by frame.

    The linear kind flattens each latent frame (``latent_shape``), multiplies
    by ``matrix`` and reshapes to ``frame_shape``. Its Jacobian is the matrix.
    """

    kind: str = "identity"
    matrix: Optional[np.ndarray] = None
    latent_shape: Optional[Tuple[int, ...]] = None
    frame_shape: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.kind not in DECODER_KINDS:
            raise ValueError(f"Unknown decoder kind '{self.kind}', expected one of {DECODER_KINDS}")
        if self.kind == "identity":
            return
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise ShapeMismatchError(f"Decoder matrix must be 2-D, got {matrix.shape}")
        latent_shape = tuple(self.latent_shape or (matrix.shape[1], 1, 1))
        frame_shape = tuple(self.frame_shape or (matrix.shape[0], 1, 1))
        if int(np.prod(latent_shape)) != matrix.shape[1] or int(np.prod(frame_shape)) != matrix.shape[0]:
            raise ShapeMismatchError(
                f"Matrix {matrix.shape} does not map latent {latent_shape} to frame {frame_shape}")
        if np.linalg.matrix_rank(matrix) < matrix.shape[1]:
            raise RankDeficientError(f"Decoder matrix {matrix.shape} lacks full column rank")
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "latent_shape", latent_shape)
        object.__setattr__(self, "frame_shape", frame_shape)

    @classmethod
    def identity(cls):
        return cls("identity")

    @classmethod
    def linear(cls, matrix, latent_shape=None, frame_shape=None):
        return cls("linear", matrix, latent_shape, frame_shape)

    def _check(self, data, expected, what):
        if self.kind == "linear" and tuple(data.shape[1:]) != expected:
            raise ShapeMismatchError(f"{what} frames are {tuple(data.shape[1:])}, decoder expects {expected}")

    def apply(self, data: np.ndarray) -> np.ndarray:
        """Decode an F x (latent_shape) array."""
        data = np.asarray(data, dtype=np.float64)
        if self.kind == "identity":
            return data.copy()
        self._check(data, self.latent_shape, "Latent")
        flat = data.reshape(data.shape[0], -1) @ self.matrix.T
        return flat.reshape((data.shape[0],) + self.frame_shape)

    def adjoint(self, data: np.ndarray) -> np.ndarray:
        """Apply A^T to a frame-space array (identity for the identity kind)."""
        data = np.asarray(data, dtype=np.float64)
        if self.kind == "identity":
            return data.copy()
        self._check(data, self.frame_shape, "Frame-space")
        flat = data.reshape(data.shape[0], -1) @ self.matrix
        return flat.reshape((data.shape[0],) + self.latent_shape)

    def encode(self, data: np.ndarray) -> np.ndarray:
        """Least-squares latent of a frame array via the pseudo-inverse."""
        data = np.asarray(data, dtype=np.float64)
        if self.kind == "identity":
            return data.copy()
        self._check(data, self.frame_shape, "Frame")
        flat = data.reshape(data.shape[0], -1) @ scipy.linalg.pinv(self.matrix).T
        return flat.reshape((data.shape[0],) + self.latent_shape)


def decode(latent, decoder: Decoder, timeline=None) -> FrameSequence:
    return FrameSequence(decoder.apply(getattr(latent, "data", latent)), timeline)
