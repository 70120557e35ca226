"""Main application entry point."""
import logging
import sys
from datetime import datetime
from typing import List, Optional

from .core.config import Settings
from .ui.commands import run

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s [%(levelname)s] %(name)s: %(message)s'


def configure_logging(settings: Settings, level: int = logging.WARNING) -> Optional[str]:
    """Log to stderr, and to a file under the home directory unless running as a snap.

    Returns the log file path, if one was created.
    """
    root = logging.getLogger()
    if root.handlers:
        return None

    handlers = []
    log_file = None
    if not settings.is_snap:
        try:
            settings.logs_dir.mkdir(parents=True, exist_ok=True)
            log_file = settings.logs_dir / f"cartankit_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(logging.DEBUG)
            handlers.append(file_handler)
        except OSError as e:
            log_file = None
            print(f"Not logging to file: {e}", file=sys.stderr)

    # stdout carries the report
    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setLevel(level)
    handlers.append(stream_handler)

    logging.basicConfig(level=logging.DEBUG, format=LOG_FORMAT, handlers=handlers)
    return str(log_file) if log_file else None


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    settings = Settings.from_env()
    log_file = configure_logging(settings)
    if log_file:
        logger.info(f"Logging to: {log_file}")
    logger.info("Starting cartankit")
    _, code = run(argv, settings)
    return code


if __name__ == '__main__':
    sys.exit(main())
