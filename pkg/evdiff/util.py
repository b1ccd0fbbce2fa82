import os
from configparser import ConfigParser

config_location = None

# Every key a config file may carry, with its default. health_check validates
# files against this table and RunConfig is built from it.
DEFAULT_CONFIG = {
    "run": {
        "seed": "0",
        "frames": "12",
        "duration": "1.0",
        "decoder": "identity",
        "decoder_matrix": "",
    },
    "schedule": {
        "sigma_min": "0.002",
        "sigma_max": "80.0",
        "steps": "30",
        "rho": "7.0",
        "sigma_data": "0.5",
    },
    "guidance": {
        "mode": "linear",
        "s_max": "0.1",
        "window": "10",
        "space": "frame",
        "predictor": "oracle",
    },
    "zeroshot": {
        "weights": "nonlinear",
        "alpha_sigma_scale": "1.0",
        "final_alpha": "",
    },
    "events": {
        "noise_eta": "0.0",
        "noise_mode": "relative",
        "drop": "false",
    },
    "simulator": {
        "threshold": "0.05",
        "per_channel": "false",
    },
    "train": {
        "kind": "affine",
        "hidden": "16",
        "optimizer": "lstsq",
        "iterations": "1000",
        "learning_rate": "0.01",
        "draws": "8",
        "log_every": "100",
        "seed": "0",
    },
    "sampler": {
        "dump_every": "0",
    },
    "logging": {
        "level": "INFO",
    },
}


def create_parser():
    configur = ConfigParser()
    configur.read_dict(DEFAULT_CONFIG)
    return configur


def load_config(path=None):
    """Defaults overlaid with the file at ``path`` (or ``config_location``)."""
    configur = create_parser()
    path = path or config_location
    if path:
        if not os.path.exists(path):
            raise FileNotFoundError(f"Configuration file not found: {path}")
        configur.read(path)
    return configur


def dump_config(configur, path):
    with open(path, "w") as configfile:
        configur.write(configfile)


def apply_overrides(configur, overrides):
    """Apply ``section.key=value`` strings on top of a parsed config."""
    for item in overrides or []:
        if "=" not in item:
            raise ValueError(f"Override '{item}' is not of the form section.key=value")
        dotted, value = item.split("=", 1)
        if "." not in dotted:
            raise ValueError(f"Override key '{dotted}' must be dotted, e.g. guidance.mode")
        section, key = dotted.strip().split(".", 1)
        if not configur.has_section(section):
            configur.add_section(section)
        configur.set(section, key, value.strip())
    return configur


def resolve_seed(configur):
    """E2F_SEED wins over the config file."""
    env_seed = os.getenv("E2F_SEED")
    if env_seed:
        return int(env_seed)
    return configur.getint("run", "seed")
