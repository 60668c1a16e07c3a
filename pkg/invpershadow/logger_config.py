"""
Logger configuration for the inverse periodic shadowing laboratory
"""
from loguru import logger
import sys
import os

from .config import LOG_DIR, LOG_LEVEL, LOG_TO_FILE

# Configure logger for the whole package
logger.remove()  # Remove default handler

# Console handler with custom format
logger.add(
    sys.stderr,
    format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>invpershadow</cyan> | <level>{message}</level>",
    level=LOG_LEVEL
)

# File handler for persistent logging
if LOG_TO_FILE:
    os.makedirs(LOG_DIR, exist_ok=True)

    logger.add(
        f"{LOG_DIR}/invpershadow.log",
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | invpershadow | {message}",
        level="DEBUG",
        rotation="10 MB",
        retention="7 days"
    )

logger.debug("invpershadow logger configured")
