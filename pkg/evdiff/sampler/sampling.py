import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from evdiff.diffusion.denoisers import Denoiser, Latent
from evdiff.diffusion.schedule import NoiseSchedule
from evdiff.errors import NonFiniteError
from evdiff.events.stacking import EventVolume
from evdiff.rawio import write_raw

logger = logging.getLogger(f"evdiff_logger.{__name__}")


@dataclass
class StepContext:
    """What a hook sees at sampling step ``step`` (0 = noisiest)."""

    step: int
    sigma: float
    sigma_prev: float
    schedule: NoiseSchedule
    window_index: Optional[int] = None
    latent: Optional[np.ndarray] = None

    @property
    def is_final(self):
        return self.step == self.schedule.steps - 1


class SamplerHook:
    """Per-step transform of the clean estimate U.

    Windowed hooks only run during the last ``window`` steps. Lower ``order``
    runs first.
    """

    windowed = False
    order = 0

    def __call__(self, u: np.ndarray, context: StepContext) -> np.ndarray:
        raise NotImplementedError


@dataclass
class SamplerConfig:
    schedule: NoiseSchedule
    window: int = 0
    hooks: List[SamplerHook] = field(default_factory=list)
    seed: Optional[int] = 0
    dump_every: int = 0
    dump_dir: Optional[str] = None

    def __post_init__(self):
        if not 0 <= self.window <= self.schedule.steps:
            raise ValueError(f"Guidance window {self.window} must lie in [0, {self.schedule.steps}]")
        if self.dump_every and not self.dump_dir:
            raise ValueError("dump_every needs a dump_dir")


def reverse_step(x_t, u_t, sigma_t, sigma_prev):
    """x_{t-1} = x_t - ((x_t - u_t) / sigma_t) * (sigma_t - sigma_{t-1})."""
    if not sigma_t > 0:
        raise ValueError(f"sigma_t must be > 0, got {sigma_t}")
    if sigma_prev > sigma_t or sigma_prev < 0:
        raise ValueError(f"sigma_prev {sigma_prev} must lie in [0, {sigma_t}]")
    x = np.asarray(getattr(x_t, "data", x_t), dtype=np.float64)
    u = np.asarray(getattr(u_t, "data", u_t), dtype=np.float64)
    if sigma_prev == 0:
        out = u.copy()
    else:
        out = x - ((x - u) / sigma_t) * (sigma_t - sigma_prev)
    if isinstance(x_t, Latent):
        return Latent(out, x_t.sigma_index + 1)
    return out


def _latent_shape(condition, shape):
    if shape is not None:
        return tuple(shape)
    if condition is None:
        raise ValueError("sample needs a latent shape when there is no condition")
    n_frames, _, height, width = condition.data.shape
    return (n_frames, 1, height, width)


def sample(denoiser: Denoiser, condition: Optional[EventVolume], config: SamplerConfig,
           refs: Optional[SamplerHook] = None, shape: Optional[Tuple[int, ...]] = None) -> Latent:
    """Run the reverse diffusion from X^T ~ N(0, sigma_T^2 I) down to sigma = 0.

    Per step: U = denoiser(X, sigma, condition), then the hooks in ``order``
    (zero-shot modulation before residual guidance), then :func:`reverse_step`.

    Args:
        denoiser: clean-estimate model.
        condition: stacked events, or None.
        config: schedule, guidance window, hooks and seed.
        refs: optional zero-shot hook run at every step before the others.
        shape: latent shape; defaults to F x 1 x H x W of the condition.

    Raises:
        NonFiniteError: the latent stopped being finite; carries the step.
    """
    schedule = config.schedule
    steps = schedule.steps
    hooks: Sequence[SamplerHook] = sorted(([refs] if refs is not None else []) + list(config.hooks),
                                          key=lambda hook: hook.order)
    rng = np.random.default_rng(config.seed)
    x = schedule.sigma_max * rng.standard_normal(_latent_shape(condition, shape))
    first_windowed = steps - config.window

    for i in range(steps):
        sigma, sigma_prev = float(schedule.sigmas[i]), float(schedule.sigmas[i + 1])
        u = denoiser(x, sigma, condition)
        window_index = i - first_windowed if i >= first_windowed else None
        context = StepContext(i, sigma, sigma_prev, schedule, window_index, x)
        for hook in hooks:
            if hook.windowed and window_index is None:
                continue
            u = hook(u, context)
        x = reverse_step(x, u, sigma, sigma_prev)
        if not np.all(np.isfinite(x)):
            raise NonFiniteError("Latent became non-finite during sampling", step=i)
        logger.debug(f"step {i}: sigma {sigma:.4g} -> {sigma_prev:.4g}, |x| max {np.abs(x).max():.4g}")
        if config.dump_every and (i + 1) % config.dump_every == 0:
            os.makedirs(config.dump_dir, exist_ok=True)
            write_raw(os.path.join(config.dump_dir, f"latent_step_{i + 1:03d}.f32"), x)

    return Latent(x, sigma_index=steps)
