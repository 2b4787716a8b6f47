"""Logging utility"""
import logging
import sys

from config import LOGGING_CONFIG, LOG_TO_FILE, LOGS_DIR


def setup_logger(name: str = __name__) -> logging.Logger:
    """Setup and return a logger instance writing to stderr"""
    logger = logging.getLogger(name)

    if not logger.handlers:
        formatter = logging.Formatter(LOGGING_CONFIG["formatters"]["default"]["format"])

        # stdout carries command output, keep diagnostics off it
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(formatter)
        logger.addHandler(handler)

        if LOG_TO_FILE:
            LOGS_DIR.mkdir(exist_ok=True)
            file_handler = logging.FileHandler(LOGGING_CONFIG["file"])
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)

        logger.setLevel(LOGGING_CONFIG["level"])
        logger.propagate = False

    return logger


def set_level(level: str) -> None:
    """Change the level of every logger created through setup_logger"""
    for logger in logging.Logger.manager.loggerDict.values():
        if isinstance(logger, logging.Logger) and logger.handlers:
            logger.setLevel(level.upper())
