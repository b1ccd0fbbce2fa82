from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.ndimage import gaussian_filter

from evdiff.errors import ShapeMismatchError

SSIM_SIGMA = 1.5
SSIM_WINDOW = 11
SSIM_HEADER_NOTE = "# ssim: 11x11 gaussian window (std 1.5), K1=0.01 K2=0.03, range 1.0, averaged over channels"


def _frames(value):
    data = np.asarray(getattr(value, "data", value), dtype=np.float64)
    if data.ndim == 3:
        data = data[:, None]
    if data.ndim != 4:
        raise ShapeMismatchError(f"Expected F x C x H x W frames, got {data.shape}")
    return data


def _pair(a, b):
    a, b = _frames(a), _frames(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"Frame shapes differ: {a.shape} vs {b.shape}")
    return a, b


@dataclass
class MetricReport:
    mse: np.ndarray
    ssim: np.ndarray

    @property
    def mean_mse(self):
        return float(np.mean(self.mse))

    @property
    def mean_ssim(self):
        return float(np.mean(self.ssim))

    def to_rows(self) -> List[dict]:
        rows = [{"frame_index": f, "mse": float(m), "ssim": float(s)}
                for f, (m, s) in enumerate(zip(self.mse, self.ssim))]
        rows.append({"frame_index": "mean", "mse": self.mean_mse, "ssim": self.mean_ssim})
        return rows


def mse(a, b) -> Tuple[np.ndarray, float]:
    """Per-frame mean squared error and the sequence mean."""
    a, b = _pair(a, b)
    per_frame = np.mean((a - b) ** 2, axis=(1, 2, 3))
    return per_frame, float(per_frame.mean())


def _blur(image):
    # truncate 3.5 * 1.5 -> radius 5, an 11-tap window
    return gaussian_filter(image, SSIM_SIGMA, truncate=3.5)


def _ssim_plane(x, y, k1, k2, data_range):
    blur = _blur
    c1, c2 = (k1 * data_range) ** 2, (k2 * data_range) ** 2
    mu_x, mu_y = blur(x), blur(y)
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_x * mu_y
    index = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / ((mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2))
    pad = SSIM_WINDOW // 2
    return float(index[pad:-pad, pad:-pad].mean())


def ssim(a, b, window=SSIM_WINDOW, k1=0.01, k2=0.03, data_range=1.0) -> Tuple[np.ndarray, float]:
    """Gaussian-windowed SSIM per frame (channels averaged) and the sequence mean."""
    if window != SSIM_WINDOW:
        raise ValueError(f"Only the {SSIM_WINDOW}x{SSIM_WINDOW} window is supported")
    a, b = _pair(a, b)
    if min(a.shape[2:]) < window:
        raise ValueError(f"Frames {a.shape[2:]} are smaller than the {window}x{window} SSIM window")
    per_frame = np.array([
        np.mean([_ssim_plane(a[f, c], b[f, c], k1, k2, data_range) for c in range(a.shape[1])])
        for f in range(a.shape[0])
    ])
    return per_frame, float(per_frame.mean())


def evaluate(pred, truth) -> MetricReport:
    return MetricReport(mse(pred, truth)[0], ssim(pred, truth)[0])
