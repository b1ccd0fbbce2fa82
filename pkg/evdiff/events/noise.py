import logging

import numpy as np

from evdiff.events.stacking import EventVolume

logger = logging.getLogger(f"evdiff_logger.{__name__}")

BASELINE_STD = 0.02
DEGENERATE_VARIANCE = "degenerate variance"
NOISY = "noisy"
NOISE_MODES = ("relative", "baseline")


def inject_noise(volume: EventVolume, eta: float, seed=None, mode: str = "relative") -> EventVolume:
    """Add zero-mean Gaussian noise to every element of the volume.

    Args:
        volume: stacked events.
        eta: noise-level coefficient, >= 0.
        seed: seed for ``numpy.random.default_rng``.
        mode: ``relative`` uses std = eta * std(volume); ``baseline`` uses the
            fixed absolute std 0.02 scaled by eta (eta=1 is the plain 0.02 scheme).

    Returns:
        A new volume flagged ``noisy``. A zero-variance volume in relative
        mode comes back unchanged and flagged ``degenerate variance``.
    """
    if eta < 0:
        raise ValueError(f"eta must be >= 0, got {eta}")
    if mode not in NOISE_MODES:
        raise ValueError(f"Unknown noise mode '{mode}', expected one of {NOISE_MODES}")
    if eta == 0:
        return volume

    if mode == "relative":
        spread = float(np.std(volume.data))
        if spread == 0.0:
            logger.warning("Event volume has zero variance; no noise injected")
            return volume.with_flag(DEGENERATE_VARIANCE)
        std = eta * spread
    else:
        std = eta * BASELINE_STD

    rng = np.random.default_rng(seed)
    noisy = volume.data + rng.normal(0.0, std, size=volume.data.shape)
    return EventVolume(noisy, volume.flags | {NOISY})
