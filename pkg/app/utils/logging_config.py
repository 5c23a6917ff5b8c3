import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Optional

_HANDLER_TAG = "_dfdam_handler"


def _tag(handler: logging.Handler) -> logging.Handler:
    setattr(handler, _HANDLER_TAG, True)
    return handler


def setup_logging(log_level=logging.INFO, log_dir: Optional[str] = "logs"):
    """Configure logging for the application.

    Safe to call more than once: handlers installed by an earlier call are
    replaced rather than duplicated. Passing ``log_dir=None`` keeps logging on
    the console only.
    """
    log_format = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    logger = logging.getLogger()
    training_logger = logging.getLogger('app.modules.training')
    for target in (logger, training_logger):
        for handler in list(target.handlers):
            if getattr(handler, _HANDLER_TAG, False):
                target.removeHandler(handler)
                handler.close()

    logger.setLevel(log_level)

    # Configure console handler
    console_handler = _tag(logging.StreamHandler())
    console_handler.setFormatter(log_format)
    logger.addHandler(console_handler)

    if log_dir is not None:
        path = Path(log_dir)
        path.mkdir(parents=True, exist_ok=True)

        # General logs
        file_handler = _tag(RotatingFileHandler(
            path / "dfdam.log",
            maxBytes=10485760,  # 10MB
            backupCount=5
        ))
        file_handler.setFormatter(log_format)
        logger.addHandler(file_handler)

        # Training progress
        training_handler = _tag(RotatingFileHandler(
            path / "training.log",
            maxBytes=10485760,
            backupCount=5
        ))
        training_handler.setFormatter(log_format)
        training_logger.addHandler(training_handler)

    logger.debug(f"Logging configured at level {log_level}")
    return logger
