from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from evdiff.diffusion.schedule import alpha_weight

REFERENCE_MODES = ("interpolation", "prediction")
WEIGHT_MODES = ("nonlinear", "linear-descending", "linear-ascending", "constant")
TASKS = ("vfi4", "vfi11", "vfp")


@dataclass(frozen=True)
class ReferenceSet:
    """Clean reference latents for one modulated span of frames.

    ``first``/``last`` are single latent frames (C x H x W) taken at
    ``first_index``/``last_index``; frames ``span[0] <= i < span[1]`` are
    modulated with their deviations.
    """

    first: np.ndarray
    last: Optional[np.ndarray] = None
    mode: str = "interpolation"
    first_index: int = 0
    last_index: Optional[int] = None
    span: Optional[Tuple[int, int]] = None

    def __post_init__(self):
        if self.mode not in REFERENCE_MODES:
            raise ValueError(f"Unknown reference mode '{self.mode}', expected one of {REFERENCE_MODES}")
        object.__setattr__(self, "first", np.asarray(self.first, dtype=np.float64))
        if self.mode == "interpolation":
            if self.last is None or self.last_index is None:
                raise ValueError("Interpolation needs both a first and a last reference")
            if self.last_index <= self.first_index:
                raise ValueError("last_index must come after first_index")
            object.__setattr__(self, "last", np.asarray(self.last, dtype=np.float64))
        elif self.last is not None:
            raise ValueError("Prediction takes the first reference only")

    def frames(self, n_frames):
        start, stop = self.span if self.span is not None else (self.first_index, n_frames)
        return slice(start, min(stop, n_frames))


@dataclass(frozen=True)
class WeightSchedule:
    mode: str = "nonlinear"
    sigma_scale: float = 1.0
    final_alpha: Optional[float] = None

    def __post_init__(self):
        if self.mode not in WEIGHT_MODES:
            raise ValueError(f"Unknown weight mode '{self.mode}', expected one of {WEIGHT_MODES}")
        if not self.sigma_scale > 0:
            raise ValueError("sigma_scale must be > 0")
        if self.final_alpha is not None and not 0 <= self.final_alpha <= 1:
            raise ValueError("final_alpha must lie in [0, 1]")


def deviations(u, refs: ReferenceSet):
    """(D0, DF): reference minus the current estimate at each anchor frame."""
    u = np.asarray(getattr(u, "data", u), dtype=np.float64)
    d0 = refs.first - u[refs.first_index]
    if refs.mode == "prediction":
        return d0, None
    return d0, refs.last - u[refs.last_index]


def modulate_interp(u_i, d0, df, alpha):
    return alpha * (((d0 + u_i) + (df + u_i)) / 2.0) + (1.0 - alpha) * u_i


def modulate_predict(u_i, d0, alpha):
    return alpha * (d0 + u_i) + (1.0 - alpha) * u_i


def weight(schedule: WeightSchedule, sigma, k, total):
    """alpha for step ``k`` of ``total`` at noise level ``sigma``."""
    if not 0 <= k < total:
        raise ValueError(f"Step {k} outside [0, {total})")
    if schedule.final_alpha is not None and k == total - 1:
        return schedule.final_alpha
    if schedule.mode == "nonlinear":
        return float(alpha_weight(sigma, schedule.sigma_scale))
    if schedule.mode == "constant":
        return 0.5
    progress = k / (total - 1) if total > 1 else 0.0
    return 1.0 - progress if schedule.mode == "linear-descending" else progress


def vfi_layout(task: str, n_frames: int = 12) -> Tuple[List[int], List[int]]:
    """(reference indices, target indices) of an evaluation task."""
    if task == "vfi4":
        if n_frames < 5:
            raise ValueError(f"vfi4 needs at least 5 frames for two references, got {n_frames}")
        refs = list(range(0, n_frames, 4))
        targets = [i for i in range(refs[0], refs[-1]) if i not in refs]
    elif task == "vfi11":
        if n_frames < 2:
            raise ValueError(f"vfi11 needs at least 2 frames, got {n_frames}")
        refs = [0, n_frames - 1]
        targets = list(range(1, n_frames - 1))
    elif task == "vfp":
        refs = [0]
        targets = list(range(1, n_frames))
    else:
        raise ValueError(f"Unknown task '{task}', expected one of {TASKS}")
    return refs, targets


def build_reference_sets(task: str, latents, n_frames: int) -> List[ReferenceSet]:
    """Reference sets for ``task`` from clean latents (F x C x H x W; only reference frames are read).

    For vfi4 each consecutive pair of references governs its own segment and
    the shared middle frame belongs to the later segment.
    """
    latents = np.asarray(getattr(latents, "data", latents), dtype=np.float64)
    refs, _ = vfi_layout(task, n_frames)
    if task == "vfp":
        return [ReferenceSet(latents[0], mode="prediction", first_index=0, span=(0, n_frames))]
    sets = []
    pairs = list(zip(refs, refs[1:]))
    for j, (start, stop) in enumerate(pairs):
        end = stop + 1 if j == len(pairs) - 1 else stop
        sets.append(ReferenceSet(latents[start], latents[stop], "interpolation", start, stop, (start, end)))
    return sets


def modulate(u, reference_sets: Sequence[ReferenceSet], alpha):
    """Apply every reference set to its span of ``u``; other frames pass through."""
    u = np.asarray(getattr(u, "data", u), dtype=np.float64)
    out = u.copy()
    for refs in reference_sets:
        frames = refs.frames(u.shape[0])
        d0, df = deviations(u, refs)
        if refs.mode == "interpolation":
            out[frames] = modulate_interp(u[frames], d0, df, alpha)
        else:
            out[frames] = modulate_predict(u[frames], d0, alpha)
    return out
