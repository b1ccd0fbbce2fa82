import argparse
import csv
import glob
import os
import sys

import numpy as np

from evdiff import custom_logger, health_check, util
from evdiff.benchmark import run_ablation_benchmark
from evdiff.bounds.check import CSV_FIELDS, run_bound_check
from evdiff.diffusion.denoisers import ConditionalDenoiser
from evdiff.diffusion.model_io import load_model, save_model
from evdiff.diffusion.training import train_denoiser, zero_events
from evdiff.eval.metrics import SSIM_HEADER_NOTE, evaluate
from evdiff.events.noise import inject_noise
from evdiff.events.stacking import group_events, read_volume, stack_events, write_volume
from evdiff.events.stream import read_event_stream, uniform_timeline, write_event_stream
from evdiff.guidance.predictor import ResidualPredictor
from evdiff.logging_configure.custom_logging import set_log_level
from evdiff.pipeline import (
    TASKS,
    RunConfig,
    decoder_from_config,
    guidance_from_config,
    load_volume,
    prepare_condition,
    run_task,
    schedule_from_config,
    sim_config_from_config,
    train_config_from_config,
    weights_from_config,
)
from evdiff.rawio import read_raw, write_raw
from evdiff.simulator.emulator import events_to_volumes, luminance, simulate_channel_events, simulate_events
from evdiff.simulator.frames import read_frames, write_frames, write_preview
from evdiff.simulator.synthetic import drifting_blobs, translating_edge


ABLATION_FIELDS = ["comparison", "mean_a", "mean_b", "p_value", "a_not_worse"]


def write_csv(path, fieldnames, rows, comment=None):
    with open(path, "w", newline="") as csv_file:
        if comment:
            csv_file.write(comment + "\n")
        writer = csv.DictWriter(csv_file, fieldnames=fieldnames, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    custom_logger.info(f"Wrote {len(rows)} rows to {path}")


def cmd_simulate(args, run):
    cfg = run.config
    duration = cfg.getfloat("run", "duration")
    if args.frames:
        frames = read_frames(args.frames, duration)
    elif args.synthetic == "edge":
        frames = translating_edge(cfg.getint("run", "frames"), args.size, args.size, duration=duration)
    elif args.synthetic == "blobs":
        frames = drifting_blobs(cfg.getint("run", "frames"), args.size, args.size, seed=run.seed, duration=duration)
    else:
        raise ValueError("simulate needs --frames PATH or --synthetic edge|blobs")

    sim_config = sim_config_from_config(cfg)
    extension = "bin" if args.binary else "txt"
    if sim_config.per_channel and frames.channels == 3:
        streams = simulate_channel_events(frames, sim_config)
        names = [f"c{c}" for c in range(len(streams))]
    else:
        streams = [simulate_events(frames, sim_config)]
        names = [""]
    for name, stream, volume in zip(names, streams, events_to_volumes(streams, frames)):
        suffix = f"_{name}" if name else ""
        write_event_stream(stream, os.path.join(args.out, f"events{suffix}.{extension}"))
        write_volume(volume, os.path.join(args.out, f"volume{suffix}.f32"))
        custom_logger.info(f"Simulated {len(stream)} events{' for channel ' + name if name else ''}")
    write_frames(frames, os.path.join(args.out, "frames.f32"))
    if args.preview:
        write_preview(frames, os.path.join(args.out, "preview"))


def cmd_stack(args, run):
    cfg = run.config
    stream = read_event_stream(args.events)
    timeline = uniform_timeline(cfg.getint("run", "frames"), cfg.getfloat("run", "duration"))
    volume = stack_events(group_events(stream, timeline), stream.width, stream.height)
    volume = inject_noise(volume, cfg.getfloat("events", "noise_eta"), run.seed, cfg.get("events", "noise_mode"))
    write_volume(volume, os.path.join(args.out, "volume.f32"))


def load_training_pairs(data_dir):
    """``<name>.frames.f32`` files with their ``<name>.volume.f32`` partners."""
    pairs = []
    for frames_path in sorted(glob.glob(os.path.join(data_dir, "*.frames.f32"))):
        volume_path = frames_path[:-len(".frames.f32")] + ".volume.f32"
        if not os.path.exists(volume_path):
            raise FileNotFoundError(f"No event volume for {frames_path}: expected {volume_path}")
        pairs.append((read_frames(frames_path), read_volume(volume_path)))
    if not pairs:
        raise FileNotFoundError(f"No *.frames.f32 training sequences in {data_dir}")
    return pairs


def cmd_train(args, run):
    cfg = run.config
    pairs = load_training_pairs(args.data)
    decoder = decoder_from_config(cfg, pairs[0][0].data.shape[1:])
    dataset = [(decoder.encode(frames.data), volume) for frames, volume in pairs]
    if cfg.getboolean("events", "drop"):
        dataset = zero_events(dataset)

    model = ConditionalDenoiser(channels=dataset[0][0].shape[1], kind=cfg.get("train", "kind"),
                                hidden=cfg.getint("train", "hidden"),
                                sigma_data=cfg.getfloat("schedule", "sigma_data"))
    model = train_denoiser(dataset, model, train_config_from_config(cfg))
    save_model(model, os.path.join(args.out, "model.e2fm"))
    write_csv(os.path.join(args.out, "train_report.csv"), ["iteration", "loss"],
              [{"iteration": i, "loss": repr(loss)} for i, loss in model.history])

    if cfg.get("guidance", "predictor") == "learned":
        predictor = ResidualPredictor("learned", cfg.getfloat("simulator", "threshold"))
        predictor.fit([(volume, np.diff(luminance(frames), axis=0)) for frames, volume in pairs])
        write_raw(os.path.join(args.out, "predictor.f32"), predictor.coefficients)


def build_predictor(cfg, path):
    threshold = cfg.getfloat("simulator", "threshold")
    if cfg.get("guidance", "predictor") == "oracle":
        return ResidualPredictor("oracle", threshold)
    if not path:
        raise ValueError("guidance.predictor = learned needs --predictor (written by 'evdiff train')")
    return ResidualPredictor("learned", threshold, read_raw(path))


def cmd_task(args, run):
    cfg = run.config
    if run.task != "reconstruct" and not args.refs:
        raise ValueError(f"Task '{run.task}' needs --refs")
    model = load_model(args.model)
    volume = load_volume(args.events, cfg)
    frame_shape = (model.channels,) + volume.spatial_shape
    refs = read_frames(args.refs).data if args.refs else None

    dump_every = cfg.getint("sampler", "dump_every")
    frames = run_task(
        run.task, model, prepare_condition(volume, cfg, run.seed), frame_shape,
        schedule_from_config(cfg), guidance_from_config(cfg), weights_from_config(cfg),
        decoder_from_config(cfg, frame_shape), build_predictor(cfg, args.predictor),
        seed=run.seed, space=cfg.get("guidance", "space"), reference_frames=refs, n_frames=volume.n_frames,
        dump_every=dump_every, dump_dir=os.path.join(args.out, "latents") if dump_every else None,
    )
    write_frames(frames, os.path.join(args.out, "frames.f32"))
    if args.preview:
        write_preview(frames, os.path.join(args.out, "preview"))


def cmd_bound_check(args, run):
    seed = run.seed if args.seed is None else args.seed
    rows = run_bound_check(args.n, seed)
    for row in rows:
        row["holds"] = str(row["holds"]).lower()
    write_csv(os.path.join(args.out, "bound_check.csv"), CSV_FIELDS, rows)
    if any(row["holds"] == "false" for row in rows):
        raise RuntimeError("Error bound violated; see bound_check.csv")


def cmd_eval(args, run):
    report = evaluate(read_raw(args.pred), read_raw(args.gt))
    write_csv(os.path.join(args.out, "metrics.csv"), ["frame_index", "mse", "ssim"], report.to_rows(),
              comment=SSIM_HEADER_NOTE)
    custom_logger.info(f"mean MSE {report.mean_mse:.6g}, mean SSIM {report.mean_ssim:.6g}")


def cmd_benchmark(args, run):
    rows = run_ablation_benchmark(run.seed, args.sequences, run.config.getint("schedule", "steps"))
    write_csv(os.path.join(args.out, "ablation.csv"), ABLATION_FIELDS, rows)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, default=None, help="INI configuration file (default: built-in defaults)")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="Override a configuration value; may be repeated")
    common.add_argument("--out", type=str, default="evdiff_out", help="Output directory (default: evdiff_out)")

    parser = argparse.ArgumentParser(prog="evdiff", description="Event-guided frame reconstruction with toy diffusion")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", parents=[common], help="Emulate events from frames")
    simulate.add_argument("--frames", type=str, help="Frames as raw f32 with .hdr sidecar")
    simulate.add_argument("--synthetic", choices=("edge", "blobs"), help="Generate frames instead of reading them")
    simulate.add_argument("--size", type=int, default=32, help="Side of synthetic frames (default: 32)")
    simulate.add_argument("--binary", action="store_true", help="Write events in the EVT0 binary format")
    simulate.add_argument("--preview", action="store_true", help="Write PGM/PPM previews of the frames")
    simulate.set_defaults(handler=cmd_simulate)

    stack = sub.add_parser("stack", parents=[common], help="Stack an event stream into a volume")
    stack.add_argument("--events", type=str, required=True)
    stack.set_defaults(handler=cmd_stack)

    train = sub.add_parser("train", parents=[common], help="Train the toy conditional denoiser")
    train.add_argument("--data", type=str, required=True,
                       help="Directory of <name>.frames.f32 / <name>.volume.f32 pairs")
    train.set_defaults(handler=cmd_train)

    for task in TASKS:
        task_parser = sub.add_parser(task, parents=[common], help=f"Run the {task} task")
        task_parser.add_argument("--events", type=str, required=True, help="Event volume (.f32) or stream")
        task_parser.add_argument("--model", type=str, required=True, help="Trained model (.e2fm)")
        task_parser.add_argument("--refs", type=str, help="Reference frames (.f32); required except for reconstruct")
        task_parser.add_argument("--predictor", type=str, help="Learned residual predictor coefficients (.f32)")
        task_parser.add_argument("--preview", action="store_true", help="Write PGM/PPM previews of the output")
        task_parser.set_defaults(handler=cmd_task)

    bound = sub.add_parser("bound-check", parents=[common], help="Check the reconstruction error bound")
    bound.add_argument("--n", type=int, default=200, help="Number of random instances (default: 200)")
    bound.add_argument("--seed", type=int, default=None, help="First instance seed (default: run.seed)")
    bound.set_defaults(handler=cmd_bound_check)

    evaluate_parser = sub.add_parser("eval", parents=[common], help="MSE and SSIM against ground truth")
    evaluate_parser.add_argument("--pred", type=str, required=True)
    evaluate_parser.add_argument("--gt", type=str, required=True)
    evaluate_parser.set_defaults(handler=cmd_eval)

    benchmark = sub.add_parser("benchmark", parents=[common], help="Paired toy ablations on synthetic sequences")
    benchmark.add_argument("--sequences", type=int, default=20, help="Number of test sequences (default: 20)")
    benchmark.set_defaults(handler=cmd_benchmark)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        health_check.check_python_version()
        if args.config:
            health_check.check_config_file(args.config)
        util.config_location = args.config
        configur = util.apply_overrides(util.load_config(), args.set)
        health_check.check_config(configur)
        set_log_level(configur.get("logging", "level"))

        paths = {name: getattr(args, name, None) for name in ("events", "model", "refs", "frames", "data",
                                                               "pred", "gt", "predictor")}
        run = RunConfig.from_config(args.command, configur, **paths)
        configur.set("run", "seed", str(run.seed))
        os.makedirs(args.out, exist_ok=True)
        util.dump_config(configur, os.path.join(args.out, "effective_config.ini"))

        custom_logger.info(f"evdiff {args.command}: seed {run.seed}, output {args.out}")
        args.handler(args, run)
    except Exception as exc:
        custom_logger.error(str(exc))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
