"""Config-driven glue between the modules: builds schedules, hooks and
decoders from an INI parser and runs the reconstruction tasks."""
import os
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from evdiff import custom_logger
from evdiff.diffusion.denoisers import Denoiser
from evdiff.diffusion.schedule import NoiseSchedule, make_schedule
from evdiff.diffusion.training import TrainConfig
from evdiff.errors import ShapeMismatchError
from evdiff.events.noise import inject_noise
from evdiff.events.stacking import EventVolume, group_events, read_volume, stack_events
from evdiff.events.stream import read_event_stream, uniform_timeline
from evdiff.guidance.hook import GuidanceHook
from evdiff.guidance.predictor import ResidualPredictor
from evdiff.guidance.schedule import GuidanceSchedule
from evdiff.rawio import read_raw
from evdiff.sampler.decoder import Decoder, decode
from evdiff.sampler.sampling import SamplerConfig, sample
from evdiff.simulator.frames import FrameSequence, SimConfig
from evdiff.util import resolve_seed
from evdiff.zeroshot.hook import ZeroShotHook
from evdiff.zeroshot.modulation import WeightSchedule, build_reference_sets

TASKS = ("reconstruct", "vfi4", "vfi11", "vfp")


@dataclass
class RunConfig:
    """Task, file paths and the parsed INI of one CLI run."""

    task: str
    config: object
    paths: Dict[str, Optional[str]] = field(default_factory=dict)
    seed: int = 0

    @classmethod
    def from_config(cls, task, configur, **paths):
        for name, path in paths.items():
            if name != "out" and path and not os.path.exists(path):
                raise FileNotFoundError(f"{name} file not found: {path}")
        return cls(task, configur, dict(paths), resolve_seed(configur))


def schedule_from_config(cfg) -> NoiseSchedule:
    return make_schedule(cfg.getfloat("schedule", "sigma_min"), cfg.getfloat("schedule", "sigma_max"),
                         cfg.getint("schedule", "steps"), cfg.getfloat("schedule", "rho"),
                         cfg.getfloat("schedule", "sigma_data"))


def guidance_from_config(cfg) -> GuidanceSchedule:
    return GuidanceSchedule(cfg.get("guidance", "mode"), cfg.getfloat("guidance", "s_max"),
                            cfg.getint("guidance", "window"))


def weights_from_config(cfg) -> WeightSchedule:
    final_alpha = cfg.get("zeroshot", "final_alpha").strip()
    return WeightSchedule(cfg.get("zeroshot", "weights"), cfg.getfloat("zeroshot", "alpha_sigma_scale"),
                          float(final_alpha) if final_alpha else None)


def sim_config_from_config(cfg) -> SimConfig:
    return SimConfig(cfg.getfloat("simulator", "threshold"), cfg.getboolean("simulator", "per_channel"))


def train_config_from_config(cfg, seed=None) -> TrainConfig:
    return TrainConfig(
        iterations=cfg.getint("train", "iterations"),
        learning_rate=cfg.getfloat("train", "learning_rate"),
        optimizer=cfg.get("train", "optimizer"),
        draws=cfg.getint("train", "draws"),
        sigma_min=cfg.getfloat("schedule", "sigma_min"),
        sigma_max=cfg.getfloat("schedule", "sigma_max"),
        seed=cfg.getint("train", "seed") if seed is None else seed,
        log_every=cfg.getint("train", "log_every"),
    )


def decoder_from_config(cfg, frame_shape) -> Decoder:
    """Identity, or a square per-frame matrix read from ``run.decoder_matrix``."""
    if cfg.get("run", "decoder") == "identity":
        return Decoder.identity()
    matrix = read_raw(cfg.get("run", "decoder_matrix"))
    return Decoder.linear(matrix, tuple(frame_shape), tuple(frame_shape))


def load_volume(path, cfg) -> EventVolume:
    """A stacked volume (``.f32``) or an event stream grouped on the uniform timeline."""
    if path.endswith(".f32"):
        return read_volume(path)
    stream = read_event_stream(path)
    timeline = uniform_timeline(cfg.getint("run", "frames"), cfg.getfloat("run", "duration"))
    return stack_events(group_events(stream, timeline), stream.width, stream.height)


def prepare_condition(volume: EventVolume, cfg, seed) -> Optional[EventVolume]:
    """Apply the event noise and drop settings; None means no events."""
    if cfg.getboolean("events", "drop"):
        return None
    return inject_noise(volume, cfg.getfloat("events", "noise_eta"), seed, cfg.get("events", "noise_mode"))


def run_task(task: str, denoiser: Denoiser, condition: Optional[EventVolume], frame_shape,
             schedule: NoiseSchedule, guidance: GuidanceSchedule, weights: WeightSchedule,
             decoder: Decoder, predictor: ResidualPredictor, seed=0, space="frame",
             reference_frames=None, n_frames=None, dump_every=0, dump_dir=None) -> FrameSequence:
    """Sample one sequence for ``task`` and decode it.

    Args:
        frame_shape: (C, H, W) of a decoded frame.
        condition: event volume, or None to run without events (no guidance either).
        reference_frames: F x C x H x W frames; only the task's reference
            indices are read. Required for vfi4, vfi11 and vfp.
    """
    if task not in TASKS:
        raise ValueError(f"Unknown task '{task}', expected one of {TASKS}")
    if condition is None and n_frames is None:
        raise ValueError("n_frames is needed when there is no event condition")
    n_frames = condition.n_frames if condition is not None else n_frames

    hooks = []
    if condition is not None and guidance.mode != "off" and guidance.window > 0:
        residual = predictor.predict(condition, channels=frame_shape[0], space=space, decoder=decoder)
        guide_decoder = Decoder.identity() if space == "latent" else decoder
        hooks.append(GuidanceHook(residual, guide_decoder, guidance))

    modulation = None
    if task != "reconstruct":
        if reference_frames is None:
            raise ValueError(f"Task '{task}' needs reference frames")
        reference_frames = np.asarray(getattr(reference_frames, "data", reference_frames), dtype=np.float64)
        if reference_frames.shape[0] != n_frames or tuple(reference_frames.shape[1:]) != tuple(frame_shape):
            raise ShapeMismatchError(
                f"Reference frames {reference_frames.shape} do not match {n_frames} x {tuple(frame_shape)}")
        modulation = ZeroShotHook(build_reference_sets(task, decoder.encode(reference_frames), n_frames), weights)

    latent_frame = decoder.latent_shape if decoder.kind == "linear" else tuple(frame_shape)
    config = SamplerConfig(schedule, guidance.window, hooks, seed, dump_every, dump_dir)
    custom_logger.info(f"Running {task}: {n_frames} frames, {schedule.steps} steps, guidance {guidance.mode}")
    latent = sample(denoiser, condition, config, refs=modulation, shape=(n_frames,) + tuple(latent_frame))
    return decode(latent, decoder, uniform_timeline(n_frames))
