"""Toy ablation benchmark: paired comparisons over drifting-blob sequences.

Each comparison runs two configurations on the same sequences and seeds and
reports both mean MSEs with a Wilcoxon signed-rank p-value.
"""
from typing import Dict, List

import numpy as np
from scipy import stats

from evdiff import custom_logger
from evdiff.diffusion.denoisers import ConditionalDenoiser
from evdiff.diffusion.schedule import make_schedule
from evdiff.diffusion.training import TrainConfig, train_denoiser, zero_events
from evdiff.events.stacking import EventVolume
from evdiff.eval.metrics import mse
from evdiff.guidance.predictor import ResidualPredictor
from evdiff.guidance.schedule import GuidanceSchedule
from evdiff.pipeline import run_task
from evdiff.sampler.decoder import Decoder
from evdiff.simulator.emulator import events_to_volumes, simulate_events
from evdiff.simulator.frames import SimConfig
from evdiff.simulator.synthetic import drifting_blobs
from evdiff.zeroshot.modulation import WeightSchedule

N_FRAMES, SIDE, THRESHOLD = 12, 16, 0.05
N_TRAIN = 8


def make_sequences(count, seed):
    config = SimConfig(THRESHOLD)
    pairs = []
    for i in range(count):
        frames = drifting_blobs(N_FRAMES, SIDE, SIDE, seed=seed + i)
        volume = events_to_volumes(simulate_events(frames, config), frames)[0]
        pairs.append((frames, volume))
    return pairs


def paired_test(name, first: List[float], second: List[float]) -> Dict:
    """first <= second on average, with a two-sided Wilcoxon p-value."""
    first, second = np.asarray(first), np.asarray(second)
    # wilcoxon rejects all-zero differences
    p_value = 1.0 if np.array_equal(first, second) else float(stats.wilcoxon(first, second).pvalue)
    row = {
        "comparison": name,
        "mean_a": float(first.mean()),
        "mean_b": float(second.mean()),
        "p_value": p_value,
        "a_not_worse": bool(first.mean() <= second.mean()),
    }
    custom_logger.info(f"{name}: {row['mean_a']:.6g} vs {row['mean_b']:.6g} (p={p_value:.3g})")
    return row


def run_ablation_benchmark(seed=0, n_sequences=20, steps=30) -> List[Dict]:
    """Train the event-conditioned and zeroed-event toy models, then compare
    linear vs constant guidance, unguided events vs zeroed events, and vfi11 vs
    reconstruct on the endpoint frames."""
    train = make_sequences(N_TRAIN, seed=10_000 + seed)
    dataset = [(frames.data, volume) for frames, volume in train]
    config = TrainConfig(iterations=1, optimizer="lstsq", draws=8, seed=seed, check_gradients=False)
    events_model = train_denoiser(dataset, ConditionalDenoiser(channels=1), config)
    blind_model = train_denoiser(zero_events(dataset), ConditionalDenoiser(channels=1), config)

    schedule = make_schedule(steps=steps)
    decoder = Decoder.identity()
    predictor = ResidualPredictor("oracle", THRESHOLD)
    weights = WeightSchedule("nonlinear")
    shape = (1, SIDE, SIDE)

    def run(task, model, volume, mode, frames, run_seed):
        guidance = GuidanceSchedule(mode, 0.1, 10)
        return run_task(task, model, volume, shape, schedule, guidance, weights, decoder, predictor,
                        seed=run_seed, reference_frames=frames.data if task != "reconstruct" else None,
                        n_frames=N_FRAMES)

    results: Dict[str, List[float]] = {key: [] for key in
                                       ("linear", "constant", "events", "blind", "vfi11_end", "recon_end")}
    endpoints = [0, N_FRAMES - 1]
    for i, (frames, volume) in enumerate(make_sequences(n_sequences, seed=seed)):
        run_seed = seed + i
        linear = run("reconstruct", events_model, volume, "linear", frames, run_seed)
        constant = run("reconstruct", events_model, volume, "constant", frames, run_seed)
        # conditioning alone: both arms unguided, the blind one sees zeroed events
        events = run("reconstruct", events_model, volume, "off", frames, run_seed)
        blind = run("reconstruct", blind_model, EventVolume(np.zeros_like(volume.data)), "off", frames, run_seed)
        vfi11 = run("vfi11", events_model, volume, "linear", frames, run_seed)
        results["linear"].append(mse(linear, frames)[1])
        results["constant"].append(mse(constant, frames)[1])
        results["events"].append(mse(events, frames)[1])
        results["blind"].append(mse(blind, frames)[1])
        results["vfi11_end"].append(mse(vfi11.data[endpoints], frames.data[endpoints])[1])
        results["recon_end"].append(mse(linear.data[endpoints], frames.data[endpoints])[1])

    return [
        paired_test("linear_vs_constant_guidance", results["linear"], results["constant"]),
        paired_test("events_vs_zeroed_events", results["events"], results["blind"]),
        paired_test("vfi11_vs_reconstruct_endpoints", results["vfi11_end"], results["recon_end"]),
    ]
