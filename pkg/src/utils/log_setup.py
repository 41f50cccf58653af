"""
Logging Setup
Configures loguru sinks for CLI and service entry points
"""

import os
import sys
from pathlib import Path
from typing import Optional, Union

from loguru import logger


CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan> - <level>{message}</level>"
)


def configure_logging(
    level: Optional[str] = None,
    log_file: Optional[Union[str, Path]] = None
) -> None:
    """
    Replace the default loguru sink

    Args:
        level: Minimum level (defaults to ALERT_LOG_LEVEL or INFO)
        log_file: Optional rotating file sink, e.g. "logs/alert_{time}.log"
    """
    level = (level or os.getenv("ALERT_LOG_LEVEL", "INFO")).upper()

    logger.remove()
    logger.add(sys.stderr, format=CONSOLE_FORMAT, level=level)

    if log_file:
        logger.add(
            str(log_file),
            rotation="1 day",
            retention="30 days",
            level="DEBUG"
        )
