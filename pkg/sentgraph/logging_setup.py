"""
Logging bootstrap for command-line entry points
"""
import logging
import sys
from typing import Optional

from .config import get_config

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level: Optional[str] = None) -> None:
    """
    Configure root logging on stderr.

    stdout is kept free for CSV and embedding output.

    Args:
        level: Level name; defaults to the active config's LOG_LEVEL
    """
    if level is None:
        level = get_config().LOG_LEVEL
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO),
                        format=LOG_FORMAT,
                        stream=sys.stderr,
                        force=True)
