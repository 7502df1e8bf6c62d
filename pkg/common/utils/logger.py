import logging
import sys
from typing import Optional, Union

_level_override: Optional[int] = None


def set_global_level(level: Union[str, int]) -> None:
    """Apply a level to every logger created through setup_logger."""
    global _level_override
    _level_override = logging.getLevelName(level) if isinstance(level, str) else level
    for name in list(logging.root.manager.loggerDict):
        if name.split('.')[0] in ('common', 'cli'):
            logging.getLogger(name).setLevel(_level_override)


def setup_logger(name: str, level: Optional[str] = None) -> logging.Logger:
    """Set up and return a logger instance."""
    logger = logging.getLogger(name)

    if level is None:
        level = _level_override if _level_override is not None else logging.INFO

    # Avoid adding handlers if they already exist
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stdout)
        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        logger.propagate = False

    logger.setLevel(level)
    return logger
