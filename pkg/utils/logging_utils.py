"""Logging setup shared by the CLI and batch scripts."""

import logging
import sys

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logging(level="INFO", log_file=None):
    """Configure the root logger with a stdout handler and an optional file handler"""
    handlers = [logging.StreamHandler(sys.stdout)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, str(level).upper(), logging.INFO),
        format=LOG_FORMAT,
        datefmt=DATE_FORMAT,
        handlers=handlers,
        force=True
    )


def log_event(logger, level, message, **kwargs):
    """Log ``message`` with ``key=value`` context appended"""
    if kwargs:
        extra_info = ' | '.join(f'{k}={v}' for k, v in kwargs.items())
        message = f"{message} | {extra_info}"

    if level == 'error':
        logger.error(message)
    elif level == 'warning':
        logger.warning(message)
    elif level == 'debug':
        logger.debug(message)
    else:
        logger.info(message)
