import numpy as np

from evdiff.events.stream import uniform_timeline
from evdiff.simulator.frames import FrameSequence


def translating_edge(n_frames=8, height=16, width=16, speed=1.0, sharpness=2.0,
                     low=0.2, high=0.8, channels=1, duration=1.0, start=None):
    """A soft vertical edge moving right by ``speed`` pixels per frame.

    Bright on the left, so every pixel brightens monotonically as the edge passes.
    """
    start = width / 4.0 if start is None else start
    cols = np.arange(width, dtype=np.float64)
    positions = start + speed * np.arange(n_frames)
    profile = 1.0 / (1.0 + np.exp((cols[None, :] - positions[:, None]) / sharpness))
    rows = low + (high - low) * profile
    data = np.broadcast_to(rows[:, None, None, :], (n_frames, channels, height, width)).copy()
    return FrameSequence(data, uniform_timeline(n_frames, duration))


def drifting_blobs(n_frames=12, height=16, width=16, n_blobs=3, seed=None, channels=1,
                   background=0.3, duration=1.0):
    """Gaussian blobs drifting on a flat background, clipped to [0, 1]."""
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    centers = rng.uniform([0, 0], [height, width], size=(n_blobs, 2))
    velocity = rng.uniform(-1.0, 1.0, size=(n_blobs, 2))
    radius = rng.uniform(1.5, 3.5, size=n_blobs)
    amplitude = rng.uniform(-0.3, 0.5, size=(n_blobs, channels))

    data = np.full((n_frames, channels, height, width), background)
    for f in range(n_frames):
        for b in range(n_blobs):
            cy, cx = centers[b] + f * velocity[b]
            bump = np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * radius[b] ** 2))
            data[f] += amplitude[b][:, None, None] * bump
    return FrameSequence(np.clip(data, 0.0, 1.0), uniform_timeline(n_frames, duration))
