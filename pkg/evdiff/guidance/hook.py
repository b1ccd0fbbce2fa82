import logging

from evdiff.guidance.residual import descent_strength, guide
from evdiff.guidance.schedule import GuidanceSchedule, schedule_strength
from evdiff.sampler.decoder import Decoder
from evdiff.sampler.sampling import SamplerHook, StepContext
from evdiff.simulator.frames import ResidualField

logger = logging.getLogger(f"evdiff_logger.{__name__}")


class GuidanceHook(SamplerHook):
    """One residual-guidance step on U during each step of the guidance window."""

    windowed = True
    order = 1

    def __init__(self, residual: ResidualField, decoder: Decoder, schedule: GuidanceSchedule, backtrack=False):
        self.residual = residual
        self.decoder = decoder
        self.schedule = schedule
        self.backtrack = backtrack

    def __call__(self, u, context: StepContext):
        s = schedule_strength(self.schedule, context.window_index)
        if self.backtrack and s > 0:
            s = descent_strength(u, self.residual, self.decoder, s)
        logger.debug(f"guidance step {context.step} (window {context.window_index}): s={s:.4g}")
        if s == 0:
            return u
        return guide(u, self.residual, s, self.decoder)
