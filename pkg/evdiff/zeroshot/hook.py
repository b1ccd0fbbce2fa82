import logging
from typing import Sequence

from evdiff.sampler.sampling import SamplerHook, StepContext
from evdiff.zeroshot.modulation import ReferenceSet, WeightSchedule, modulate, weight

logger = logging.getLogger(f"evdiff_logger.{__name__}")


class ZeroShotHook(SamplerHook):
    """Score modulation from reference latents at every sampling step."""

    windowed = False
    order = 0

    def __init__(self, reference_sets: Sequence[ReferenceSet], weights: WeightSchedule = None):
        self.reference_sets = list(reference_sets)
        self.weights = weights or WeightSchedule()

    def __call__(self, u, context: StepContext):
        alpha = weight(self.weights, context.sigma, context.step, context.schedule.steps)
        logger.debug(f"modulation step {context.step}: alpha={alpha:.4g}")
        return modulate(u, self.reference_sets, alpha)
