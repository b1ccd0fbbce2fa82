import logging
from dataclasses import asdict, dataclass
from typing import List

import numpy as np

from evdiff.bounds.linalg import lipschitz_and_condition
from evdiff.errors import ShapeMismatchError
from evdiff.events.stream import uniform_timeline
from evdiff.guidance.residual import residual_loss
from evdiff.sampler.decoder import Decoder
from evdiff.simulator.emulator import events_to_volumes, residual_from_events, simulate_events
from evdiff.simulator.frames import FrameSequence, ResidualField, SimConfig

logger = logging.getLogger(f"evdiff_logger.{__name__}")

ANCHORING = "frame0-anchored"
CSV_FIELDS = ["seed", "L", "kappa", "C", "epsilon", "loss", "lhs", "rhs", "holds"]


@dataclass
class BoundInstance:
    decoder: Decoder
    latents: np.ndarray
    frames: FrameSequence
    residual: ResidualField
    threshold: float

    def __post_init__(self):
        self.latents = np.asarray(getattr(self.latents, "data", self.latents), dtype=np.float64)
        if self.latents.shape[0] != self.frames.n_frames:
            raise ShapeMismatchError(f"{self.latents.shape[0]} latents for {self.frames.n_frames} frames")
        if self.frames.n_frames > 1:
            self.residual.check_against(self.frames.data.shape)

    @property
    def epsilon(self):
        """max_k |R_k - Delta V_k|_1, measured on the instance."""
        if self.frames.n_frames < 2:
            return 0.0
        gaps = np.abs(self.residual.data - self.frames.differences())
        return float(gaps.reshape(gaps.shape[0], -1).sum(axis=1).max())


@dataclass
class BoundReport:
    lhs: float
    loss: float
    rhs: float
    holds: bool
    epsilon: float
    L: float
    kappa: float
    C: float
    worst_frame: float
    anchoring: str = ANCHORING

    def to_row(self, seed=None):
        row = asdict(self)
        row["seed"] = seed
        return {key: row[key] for key in CSV_FIELDS}


def anchored_errors(decoded: np.ndarray, truth: np.ndarray) -> np.ndarray:
    """Per-frame |F'_k - V_k|_1 with F'_k = F_k - F_0 + V_0."""
    drift = (decoded - decoded[0]) - (truth - truth[0])
    return np.abs(drift).reshape(truth.shape[0], -1).sum(axis=1)


def check_bound(instance: BoundInstance, latents=None) -> BoundReport:
    """Evaluate both sides of |F - V|_1 <= (L kappa / C) L_residual + F eps / C.

    ``latents`` replaces the instance latents, e.g. after a guidance step.
    """
    threshold = instance.threshold
    if not threshold > 0:
        raise ValueError(f"Contrast threshold must be > 0, got {threshold}")
    latents = instance.latents if latents is None else np.asarray(latents, dtype=np.float64)
    decoder = instance.decoder
    if decoder.kind == "linear":
        lipschitz, kappa = lipschitz_and_condition(decoder.matrix)
    else:
        lipschitz, kappa = 1.0, 1.0

    n_frames = instance.frames.n_frames
    per_frame = anchored_errors(decoder.apply(latents), instance.frames.data)
    loss = residual_loss(latents, instance.residual, decoder) if n_frames > 1 else 0.0
    epsilon = instance.epsilon
    lhs = float(per_frame.sum())
    rhs = lipschitz * kappa / threshold * loss + n_frames * epsilon / threshold
    report = BoundReport(lhs, loss, rhs, bool(lhs <= rhs), epsilon, lipschitz, kappa, threshold,
                         float(per_frame.max()))
    if not report.holds:
        logger.error(f"Bound violated: lhs {lhs:.6g} > rhs {rhs:.6g}")
    return report


def random_full_rank(rng, n):
    """Q1 diag(s) Q2^T with s in [0.5, 2] and max(s) >= 1, so L >= 1."""
    q1, _ = np.linalg.qr(rng.standard_normal((n, n)))
    q2, _ = np.linalg.qr(rng.standard_normal((n, n)))
    singular = rng.uniform(0.5, 2.0, size=n)
    singular[np.argmax(singular)] = max(singular.max(), 1.0)
    return q1 @ np.diag(singular) @ q2.T


def random_instance(seed) -> BoundInstance:
    """A seeded instance whose generation ranges keep the bound's assumptions.

    F in [2, 6], C in [0.02, 0.1] and L, kappa >= 1 give L kappa / C >= F - 1
    and 1 / C >= (F - 1) / 2, which is what the telescoped left side needs.
    """
    rng = np.random.default_rng(seed)
    n_frames = int(rng.integers(2, 7))
    threshold = float(rng.uniform(0.02, 0.1))
    side = int(rng.integers(2, 5))
    shape = (1, side, side)

    start = rng.uniform(0.2, 0.8, size=shape)
    steps = rng.normal(0.0, 0.08, size=(n_frames - 1,) + shape)
    data = np.clip(np.concatenate([start[None], start[None] + np.cumsum(steps, axis=0)]), 0.0, 1.0)
    frames = FrameSequence(data, uniform_timeline(n_frames))

    config = SimConfig(threshold)
    volume = events_to_volumes(simulate_events(frames, config), frames)[0]
    residual = residual_from_events(volume, config)

    decoder = Decoder.linear(random_full_rank(rng, side * side), shape, shape)
    latents = decoder.encode(frames.data) + rng.normal(0.0, 0.05, size=data.shape)
    return BoundInstance(decoder, latents, frames, residual, threshold)


def run_bound_check(n: int, seed: int = 0) -> List[dict]:
    """One CSV row per random instance, seeds ``seed .. seed + n - 1``."""
    rows = []
    for offset in range(n):
        instance_seed = seed + offset
        rows.append(check_bound(random_instance(instance_seed)).to_row(instance_seed))
    held = sum(row["holds"] for row in rows)
    logger.info(f"Bound held on {held}/{n} instances")
    return rows
