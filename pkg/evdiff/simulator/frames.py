import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from PIL import Image

from evdiff.errors import ShapeMismatchError
from evdiff.events.stream import FrameTimeline, uniform_timeline
from evdiff.rawio import read_raw, write_raw


@dataclass(frozen=True)
class FrameSequence:
    """F x C x H x W intensities in [0, 1] with their capture times."""

    data: np.ndarray
    timeline: Optional[FrameTimeline] = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 4:
            raise ShapeMismatchError(f"Frames must be F x C x H x W, got {data.shape}")
        if data.shape[0] < 1 or data.shape[1] not in (1, 3):
            raise ShapeMismatchError(f"Frames need F >= 1 and C in {{1, 3}}, got {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValueError("Frames contain non-finite values")
        timeline = self.timeline or uniform_timeline(data.shape[0])
        if len(timeline) != data.shape[0]:
            raise ShapeMismatchError(f"{data.shape[0]} frames but {len(timeline)} timestamps")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "timeline", timeline)

    @property
    def n_frames(self):
        return self.data.shape[0]

    @property
    def channels(self):
        return self.data.shape[1]

    @property
    def height(self):
        return self.data.shape[2]

    @property
    def width(self):
        return self.data.shape[3]

    @property
    def duration(self):
        return float(self.timeline.timestamps[-1])

    def differences(self):
        """Delta V_k = V_{k+1} - V_k, shape (F-1) x C x H x W."""
        return np.diff(self.data, axis=0)


@dataclass(frozen=True)
class SimConfig:
    contrast_threshold: float = 0.05
    per_channel: bool = False

    def __post_init__(self):
        if not self.contrast_threshold > 0:
            raise ValueError(f"contrast_threshold must be > 0, got {self.contrast_threshold}")


@dataclass(frozen=True)
class ResidualField:
    """Predicted inter-frame residuals, (F-1) x C x H x W."""

    data: np.ndarray
    space: str = field(default="frame")

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 4:
            raise ShapeMismatchError(f"ResidualField must be (F-1) x C x H x W, got {data.shape}")
        object.__setattr__(self, "data", data)

    def check_against(self, frame_shape):
        expected = (frame_shape[0] - 1,) + tuple(frame_shape[1:])
        if self.data.shape != expected:
            raise ShapeMismatchError(f"Residual shape {self.data.shape} does not match frames {tuple(frame_shape)}")


def write_frames(frames: FrameSequence, path: str):
    write_raw(path, frames.data)


def read_frames(path: str, duration: float = 1.0) -> FrameSequence:
    data = read_raw(path)
    return FrameSequence(data, uniform_timeline(data.shape[0], duration))


def to_uint8(plane):
    return np.round(np.clip(plane, 0.0, 1.0) * 255.0).astype(np.uint8)


def write_preview(frames: FrameSequence, directory: str, prefix: str = "frame") -> List[str]:
    """One 8-bit PGM (C=1) or PPM (C=3) per frame."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for f, frame in enumerate(frames.data):
        if frames.channels == 1:
            image, ext = Image.fromarray(to_uint8(frame[0])), "pgm"
        else:
            image, ext = Image.fromarray(to_uint8(np.moveaxis(frame, 0, -1))), "ppm"
        target = os.path.join(directory, f"{prefix}_{f:03d}.{ext}")
        image.save(target)
        paths.append(target)
    return paths
