import logging
from logging.handlers import RotatingFileHandler
import os
import sys
from typing import Optional, Union

FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(log_level: Union[int, str] = logging.INFO,
                  log_dir: Optional[str] = None,
                  log_file: bool = True) -> logging.Logger:
    """
    Setup application logging configuration.

    Args:
        log_level: The logging level (default: INFO)
        log_dir: Directory for the rotating log file (default: ./logs)
        log_file: Whether to attach the rotating file handler at all

    Returns:
        The configured "maapnet" logger
    """
    if isinstance(log_level, str):
        log_level = logging.getLevelName(log_level.upper())
        if not isinstance(log_level, int):
            log_level = logging.INFO

    logger = logging.getLogger("maapnet")
    logger.setLevel(log_level)

    # Repeated calls (tests, several CLI invocations in one process) must not stack handlers
    if getattr(logger, "_maapnet_configured", False):
        for handler in logger.handlers:
            handler.setLevel(log_level)
        return logger

    formatter = logging.Formatter(FORMAT)

    # Diagnostics go to stderr so stdout stays machine-readable
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        try:
            log_dir = log_dir or os.path.join(os.getcwd(), 'logs')
            os.makedirs(log_dir, exist_ok=True)
            file_handler = RotatingFileHandler(
                filename=os.path.join(log_dir, 'maapnet.log'),
                maxBytes=10*1024*1024,  # 10 MB
                backupCount=5
            )
            file_handler.setLevel(log_level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except Exception as e:
            logger.warning(f"Could not setup file logging: {e}")

    logger.propagate = False
    logger._maapnet_configured = True
    return logger
