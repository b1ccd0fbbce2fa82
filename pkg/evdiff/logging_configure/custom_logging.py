import logging
import os
from logging.handlers import RotatingFileHandler


def configure_custom_logging():
    home_dir = os.getenv("HOME") or os.path.expanduser("~")
    log_location = os.getenv("EVDIFF_LOG_DIR") or os.path.join(home_dir, ".evdiff", "logs")
    log_level = os.getenv("EVDIFF_LOG_LEVEL", "INFO").upper()
    log_filename = os.path.join(log_location, "evdiff.log")
    log_file_max_bytes = 5
    log_backup_count = 3

    custom_logger = logging.getLogger("evdiff_logger")
    custom_logger.setLevel(log_level)
    # configure once per process
    if custom_logger.handlers:
        return custom_logger

    formatter = logging.Formatter('%(asctime)s [%(levelname)s] %(message)s', datefmt='%Y-%m-%d %H:%M:%S')

    stream_handler = logging.StreamHandler()
    stream_handler.setLevel(log_level)
    stream_handler.setFormatter(formatter)
    custom_logger.addHandler(stream_handler)

    try:
        os.makedirs(log_location, exist_ok=True)
        rotating_handler = RotatingFileHandler(log_filename, maxBytes=log_file_max_bytes * 1024 * 1024,
                                               backupCount=log_backup_count)
        rotating_handler.setFormatter(formatter)
        custom_logger.addHandler(rotating_handler)
    except OSError as exc:
        custom_logger.warning(f"File logging disabled, cannot write to {log_location}: {exc}")

    return custom_logger


def set_log_level(level):
    """Apply a level name from the [logging] config section to every handler."""
    custom_logger = logging.getLogger("evdiff_logger")
    custom_logger.setLevel(level.upper())
    for handler in custom_logger.handlers:
        handler.setLevel(level.upper())
