"""Logger setup shared by the library and the command line."""

import logging

FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def setup_logger(name: str = "mcpinns", level: str = "INFO") -> logging.Logger:
    """Set up a logger with a nice format."""
    logger = logging.getLogger(name)

    # Only add handler if logger doesn't have one
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(FORMAT, datefmt=DATE_FORMAT))
        logger.addHandler(handler)

    logger.setLevel(getattr(logging, level.upper()))
    return logger
