import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from evdiff.events.stacking import CHANNEL_ALL, EventVolume
from evdiff.sampler.decoder import Decoder
from evdiff.simulator.frames import ResidualField

logger = logging.getLogger(f"evdiff_logger.{__name__}")

PREDICTOR_KINDS = ("oracle", "learned")
IRLS_ITERATIONS = 30
IRLS_FLOOR = 1e-6


@dataclass
class ResidualPredictor:
    """Event volume -> inter-frame residuals.

    ``oracle`` scales the signed event sum by the contrast threshold.
    ``learned`` is an affine map of (ch0, ch1, ch2) shared by all pixels,
    fitted with an L1 loss.
    """

    kind: str = "oracle"
    threshold: float = 0.05
    coefficients: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        if self.kind not in PREDICTOR_KINDS:
            raise ValueError(f"Unknown predictor kind '{self.kind}', expected one of {PREDICTOR_KINDS}")
        if not self.threshold > 0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")

    @staticmethod
    def _design(volume: EventVolume):
        # interval k between frames k and k+1 is group k+1
        gaps = volume.data[1:]
        rows = np.moveaxis(gaps, 1, -1).reshape(-1, 3)
        return np.hstack([rows, np.ones((rows.shape[0], 1))])

    def fit(self, pairs: Sequence[Tuple[EventVolume, np.ndarray]]):
        """Fit on (volume, true single-channel differences (F-1) x H x W) pairs by IRLS."""
        if self.kind != "learned":
            return self
        design = np.vstack([self._design(volume) for volume, _ in pairs])
        target = np.concatenate([np.asarray(diff, dtype=np.float64).reshape(-1) for _, diff in pairs])
        coef, *_ = scipy.linalg.lstsq(design, target)
        for _ in range(IRLS_ITERATIONS):
            weights = 1.0 / np.sqrt(np.maximum(np.abs(target - design @ coef), IRLS_FLOOR))
            coef, *_ = scipy.linalg.lstsq(design * weights[:, None], target * weights)
        self.coefficients = coef
        logger.info(f"Residual predictor coefficients {np.round(coef, 6).tolist()}")
        return self

    def predict(self, volume: EventVolume, channels: int = 1, space: str = "frame",
                decoder: Optional[Decoder] = None) -> ResidualField:
        """(F-1) x channels x H x W residuals; ``space='latent'`` maps them through A^+."""
        if self.kind == "oracle":
            single = self.threshold * volume.data[1:, CHANNEL_ALL]
        else:
            if self.coefficients is None:
                raise RuntimeError("Learned residual predictor has not been fitted")
            n_gaps, _, height, width = volume.data[1:].shape
            single = (self._design(volume) @ self.coefficients).reshape(n_gaps, height, width)
        data = np.repeat(single[:, None], channels, axis=1)
        if space == "latent":
            if decoder is None:
                raise ValueError("Latent-space residuals need the decoder")
            return ResidualField(decoder.encode(data), space="latent")
        if space != "frame":
            raise ValueError(f"Unknown residual space '{space}'")
        return ResidualField(data)
