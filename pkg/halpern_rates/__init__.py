"""Halpern iterations on CAT(kappa) model spaces and their rate certificates."""
import logging
from logging.handlers import RotatingFileHandler
import os
import sys
from contextlib import contextmanager
from contextvars import ContextVar

from config import config

__version__ = "1.0.0"

_current_runtime = ContextVar("halpern_runtime", default=None)


class Runtime:
    """Resolved configuration plus the package logger.

    Plays the role an application object plays in a web service: the
    configuration is loaded once and pushed as the current runtime, and
    services read budgets and tolerances from it.
    """

    def __init__(self, config_name="default"):
        if config_name not in config:
            raise KeyError(f"Unknown configuration '{config_name}'")
        self.config_name = config_name
        config_class = config[config_name]
        self.config = {
            key: getattr(config_class, key)
            for key in dir(config_class)
            if key.isupper()
        }
        self.logger = logging.getLogger("halpern_rates")
        self._config_class = config_class

    @property
    def debug(self):
        return bool(self.config.get("DEBUG"))

    @property
    def testing(self):
        return bool(self.config.get("TESTING"))

    @contextmanager
    def context(self):
        """Make this runtime the current one for the enclosed block."""
        token = _current_runtime.set(self)
        try:
            yield self
        finally:
            _current_runtime.reset(token)

    def __repr__(self):
        return f"<Runtime {self.config_name}>"


def create_runtime(config_name="default", **overrides):
    """Create and configure a runtime.

    Args:
        config_name: Configuration name (development, testing, production)
        **overrides: Settings replacing the configured values

    Returns:
        Configured Runtime instance
    """
    runtime = Runtime(config_name)
    runtime.config.update(overrides)
    runtime._config_class.init_app(runtime)

    configure_logging(runtime)
    configure_int_rendering(runtime)

    return runtime


def current_runtime():
    """Return the active runtime, creating the default one on first use."""
    runtime = _current_runtime.get()
    if runtime is None:
        runtime = create_runtime(os.getenv("HALPERN_ENV") or "default")
        _current_runtime.set(runtime)
    return runtime


def configure_logging(runtime):
    """Configure package logging."""
    logger = runtime.logger
    level = getattr(logging, runtime.config["LOG_LEVEL"])
    logger.setLevel(level)

    if runtime.testing:
        return

    formatter = logging.Formatter(
        "%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]"
    )

    if not any(isinstance(h, logging.StreamHandler) for h in logger.handlers):
        stream_handler = logging.StreamHandler(sys.stderr)
        stream_handler.setFormatter(formatter)
        stream_handler.setLevel(level)
        logger.addHandler(stream_handler)

    if not runtime.debug:
        # Create logs directory if it doesn't exist
        log_dir = os.path.dirname(runtime.config["LOG_FILE"])
        if log_dir and not os.path.exists(log_dir):
            os.makedirs(log_dir, exist_ok=True)

        if not any(isinstance(h, RotatingFileHandler) for h in logger.handlers):
            file_handler = RotatingFileHandler(
                runtime.config["LOG_FILE"], maxBytes=10240000, backupCount=10
            )
            file_handler.setFormatter(formatter)
            file_handler.setLevel(level)
            logger.addHandler(file_handler)

        logger.info(f"{runtime.config['APP_NAME']} startup")


def configure_int_rendering(runtime):
    """Allow decimal rendering of exact counts up to the digit budget."""
    if hasattr(sys, "set_int_max_str_digits"):
        budget = int(runtime.config["DIGIT_BUDGET"])
        current = sys.get_int_max_str_digits()
        if current and current < budget + 16:
            sys.set_int_max_str_digits(budget + 16)
