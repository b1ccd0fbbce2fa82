from dataclasses import dataclass

import numpy as np

GUIDANCE_MODES = ("off", "constant", "linear", "exponential")
# e^-5 < 1%: the last windowed step is practically unguided
EXP_DECAY = 5.0


@dataclass(frozen=True)
class GuidanceSchedule:
    mode: str = "linear"
    s_max: float = 0.1
    window: int = 10

    def __post_init__(self):
        if self.mode not in GUIDANCE_MODES:
            raise ValueError(f"Unknown guidance mode '{self.mode}', expected one of {GUIDANCE_MODES}")
        if self.s_max < 0 or self.window < 0:
            raise ValueError("s_max and window must be >= 0")


def schedule_strength(schedule: GuidanceSchedule, k: int) -> float:
    """Strength at position ``k`` of the guidance window (0 = first guided step)."""
    if not 0 <= k < schedule.window:
        raise ValueError(f"Window index {k} outside [0, {schedule.window})")
    if schedule.mode == "off":
        return 0.0
    if schedule.mode == "constant" or schedule.window == 1:
        return schedule.s_max
    progress = k / (schedule.window - 1)
    if schedule.mode == "linear":
        return schedule.s_max * (1.0 - progress)
    return schedule.s_max * float(np.exp(-EXP_DECAY * progress))
