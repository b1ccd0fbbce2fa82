import configparser
import os
import sys

from evdiff import custom_logger
from evdiff.errors import ConfigError
from evdiff.util import DEFAULT_CONFIG

CHOICES = {
    ("run", "decoder"): ("identity", "linear"),
    ("guidance", "mode"): ("off", "constant", "linear", "exponential"),
    ("guidance", "space"): ("frame", "latent"),
    ("guidance", "predictor"): ("oracle", "learned"),
    ("zeroshot", "weights"): ("nonlinear", "linear-descending", "linear-ascending", "constant"),
    ("events", "noise_mode"): ("relative", "baseline"),
    ("train", "kind"): ("affine", "mlp"),
    ("train", "optimizer"): ("gd", "adam", "lstsq"),
    ("logging", "level"): ("DEBUG", "INFO", "WARNING", "ERROR"),
}
POSITIVE = {
    ("run", "frames"), ("run", "duration"), ("schedule", "sigma_min"), ("schedule", "sigma_max"),
    ("schedule", "steps"), ("schedule", "rho"), ("schedule", "sigma_data"), ("simulator", "threshold"),
    ("zeroshot", "alpha_sigma_scale"), ("train", "draws"),
}
NON_NEGATIVE = {
    ("guidance", "s_max"), ("guidance", "window"), ("events", "noise_eta"), ("train", "iterations"),
    ("train", "learning_rate"), ("sampler", "dump_every"), ("train", "hidden"),
}
BOOLEANS = {("events", "drop"), ("simulator", "per_channel")}


def check_python_version():
    if sys.version_info < (3, 9):
        raise RuntimeError(f"Python 3.9 or higher is required. Current version: "
                           f"{sys.version_info[0]}.{sys.version_info[1]}")


def check_for_config_fields(config):
    """Every section and key must be a known one."""
    for section in config.sections():
        if section not in DEFAULT_CONFIG:
            raise ConfigError(f"Unknown section '[{section}]' in the configuration")
        for key in config.options(section):
            if key not in DEFAULT_CONFIG[section]:
                raise ConfigError(f"Unknown key '{key}' in section '[{section}]'")


def validate_config_values(config):
    """Check enumerations, signs and cross-key constraints."""
    for (section, key), choices in CHOICES.items():
        value = config.get(section, key).strip()
        if value not in choices:
            raise ConfigError(f"Invalid {section}.{key} '{value}'. Valid values are: {', '.join(choices)}.")
    for section, key in POSITIVE | NON_NEGATIVE:
        try:
            value = config.getfloat(section, key)
        except ValueError:
            raise ConfigError(f"{section}.{key} must be a number, got '{config.get(section, key)}'")
        if (section, key) in POSITIVE and not value > 0:
            raise ConfigError(f"{section}.{key} must be > 0, got {value}")
        if value < 0:
            raise ConfigError(f"{section}.{key} must be >= 0, got {value}")
    for section, key in BOOLEANS:
        try:
            config.getboolean(section, key)
        except ValueError:
            raise ConfigError(f"{section}.{key} must be true or false")
    if config.getfloat("schedule", "sigma_min") >= config.getfloat("schedule", "sigma_max"):
        raise ConfigError("schedule.sigma_min must be below schedule.sigma_max")
    if config.getint("guidance", "window") > config.getint("schedule", "steps"):
        raise ConfigError("guidance.window cannot exceed schedule.steps")
    final_alpha = config.get("zeroshot", "final_alpha").strip()
    if final_alpha and not 0.0 <= float(final_alpha) <= 1.0:
        raise ConfigError(f"zeroshot.final_alpha must lie in [0, 1], got {final_alpha}")
    if config.get("run", "decoder") == "linear" and not config.get("run", "decoder_matrix").strip():
        raise ConfigError("run.decoder = linear needs run.decoder_matrix")


def check_config(config):
    check_for_config_fields(config)
    validate_config_values(config)
    return config


def check_config_file(config_file):
    """Validate an INI file on disk.

    Raises:
        FileNotFoundError: the file does not exist.
        ConfigError: unknown key or invalid value.
    """
    custom_logger.info("Validating configuration file...")
    if not os.path.isfile(config_file):
        raise FileNotFoundError(f"The provided config file '{config_file}' does not exist.")
    config = configparser.ConfigParser()
    config.read_dict(DEFAULT_CONFIG)
    config.read(config_file)
    return check_config(config)
