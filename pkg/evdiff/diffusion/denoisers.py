from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from evdiff.errors import ShapeMismatchError
from evdiff.events.stacking import CHANNEL_ALL, EventVolume
from evdiff.diffusion.schedule import c_noise, c_skip

# ch0, ch1, ch2 and the running sum of ch0 over frames
EVENT_FEATURES = 4
DENOISER_KINDS = ("affine", "mlp")


@dataclass
class Latent:
    """Sampler state, F x C x H x W, at schedule index ``sigma_index``."""

    data: np.ndarray
    sigma_index: int = 0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 4:
            raise ShapeMismatchError(f"Latent must be F x C x H x W, got {self.data.shape}")

    @property
    def shape(self):
        return self.data.shape

    def copy(self):
        return Latent(self.data.copy(), self.sigma_index)


def forward_noise(x0, sigma, seed=None):
    """x0 + sigma * n with n standard normal."""
    data = np.asarray(getattr(x0, "data", x0), dtype=np.float64)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    noisy = data + sigma * np.random.default_rng(seed).standard_normal(data.shape)
    if isinstance(x0, Latent):
        return Latent(noisy, x0.sigma_index)
    return noisy


def posterior_mean_gaussian(x, sigma, mu, s0):
    """E[x0 | x] for x0 ~ N(mu, s0^2) observed as x = x0 + sigma * n."""
    if not s0 > 0:
        raise ValueError(f"s0 must be > 0, got {s0}")
    if np.isinf(sigma):
        return np.full_like(np.asarray(x, dtype=np.float64), mu)
    return (s0 ** 2 * np.asarray(x) + sigma ** 2 * mu) / (s0 ** 2 + sigma ** 2)


class Denoiser:
    """Maps a noisy latent at ``sigma`` (and an optional event condition) to a clean estimate."""

    def denoise(self, x: np.ndarray, sigma: float, condition: Optional[EventVolume] = None) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, sigma, condition=None):
        return self.denoise(np.asarray(getattr(x, "data", x), dtype=np.float64), float(sigma), condition)


class GaussianPosteriorDenoiser(Denoiser):
    def __init__(self, mu, s0):
        self.mu = mu
        self.s0 = s0

    def denoise(self, x, sigma, condition=None):
        return posterior_mean_gaussian(x, sigma, self.mu, self.s0)


class ZeroDenoiser(Denoiser):
    def denoise(self, x, sigma, condition=None):
        return np.zeros_like(x)


class ConstantDenoiser(Denoiser):
    """Always returns ``value``; useful to check the step telescoping."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=np.float64)

    def denoise(self, x, sigma, condition=None):
        return np.broadcast_to(self.value, x.shape).copy()


def event_features(condition: Optional[EventVolume], shape) -> np.ndarray:
    """F x 4 x H x W event features aligned with a latent of ``shape``."""
    n_frames, _, height, width = shape
    if condition is None:
        return np.zeros((n_frames, EVENT_FEATURES, height, width))
    data = condition.data
    if data.shape[0] != n_frames or data.shape[2:] != (height, width):
        raise ShapeMismatchError(f"Condition {data.shape} does not fit latent {tuple(shape)}")
    cumulative = np.cumsum(data[:, CHANNEL_ALL], axis=0)[:, None]
    return np.concatenate([data, cumulative], axis=1)


def design_matrix(x, sigma, condition, sigma_data):
    """Per-pixel features, one row per (f, h, w).

    Columns: c_skip * x (C of them), E (4), (1 - c_skip) * E (4),
    1 - c_skip, c_noise, 1.
    """
    skip = c_skip(sigma, sigma_data)
    events = event_features(condition, x.shape)
    n_rows = x.shape[0] * x.shape[2] * x.shape[3]

    def pixel(block):
        return np.moveaxis(block, 1, -1).reshape(n_rows, block.shape[1])

    return np.hstack([
        pixel(skip * x),
        pixel(events),
        pixel((1.0 - skip) * events),
        np.full((n_rows, 1), 1.0 - skip),
        np.full((n_rows, 1), c_noise(sigma)),
        np.ones((n_rows, 1)),
    ])


def n_features(channels):
    return channels + 2 * EVENT_FEATURES + 3


def to_pixels(x):
    """F x C x H x W -> (F*H*W) x C, matching design_matrix rows."""
    return np.moveaxis(x, 1, -1).reshape(-1, x.shape[1])


def from_pixels(rows, shape):
    n_frames, channels, height, width = shape
    return np.moveaxis(rows.reshape(n_frames, height, width, channels), -1, 1)


@dataclass
class ConditionalDenoiser(Denoiser):
    """Toy event-conditioned denoiser: affine or one tanh hidden layer over per-pixel features."""

    channels: int = 1
    kind: str = "affine"
    hidden: int = 16
    sigma_data: float = 0.5
    params: Dict[str, np.ndarray] = field(default_factory=dict)
    history: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in DENOISER_KINDS:
            raise ValueError(f"Unknown denoiser kind '{self.kind}', expected one of {DENOISER_KINDS}")

    def init_params(self, seed=None):
        rng = np.random.default_rng(seed)
        n_in = n_features(self.channels)
        if self.kind == "affine":
            self.params = {"weight": 0.01 * rng.standard_normal((n_in, self.channels))}
        else:
            self.params = {
                "w1": rng.standard_normal((n_in, self.hidden)) / np.sqrt(n_in),
                "w2": rng.standard_normal((self.hidden, self.channels)) / np.sqrt(self.hidden),
                "b2": np.zeros(self.channels),
            }
        return self

    def predict_rows(self, features, params=None):
        params = self.params if params is None else params
        if self.kind == "affine":
            return features @ params["weight"]
        return np.tanh(features @ params["w1"]) @ params["w2"] + params["b2"]

    def row_gradients(self, features, residual, params=None):
        """d/dparams of sum(weight_row * residual * prediction); ``residual`` is dL/dprediction."""
        params = self.params if params is None else params
        if self.kind == "affine":
            return {"weight": features.T @ residual}
        hidden = np.tanh(features @ params["w1"])
        back = (residual @ params["w2"].T) * (1.0 - hidden ** 2)
        return {
            "w1": features.T @ back,
            "w2": hidden.T @ residual,
            "b2": residual.sum(axis=0),
        }

    def denoise(self, x, sigma, condition=None):
        if x.shape[1] != self.channels:
            raise ShapeMismatchError(f"Denoiser expects {self.channels} channels, got {x.shape[1]}")
        if not self.params:
            raise RuntimeError("Denoiser has no parameters; train or load it first")
        rows = self.predict_rows(design_matrix(x, sigma, condition, self.sigma_data))
        return from_pixels(rows, x.shape)
