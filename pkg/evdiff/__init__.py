from evdiff.logging_configure.custom_logging import configure_custom_logging

custom_logger = configure_custom_logging()

__version__ = "0.1.0"
