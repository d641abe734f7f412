import logging
import os
from pathlib import Path


def setup_logging(format: str = None):
    """
    Configure logging for the toolkit.
    Reads LOG_LEVEL (default INFO) and LOG_FILE_PATH (optional) from the environment.
    A console handler is always installed; a file handler is added when LOG_FILE_PATH is set.
    """
    log_level_str = os.environ.get("LOG_LEVEL", "INFO").upper()
    log_level = getattr(logging, log_level_str, logging.INFO)

    handlers = [logging.StreamHandler()]
    log_file = os.environ.get("LOG_FILE_PATH")
    if log_file:
        log_file_path = Path(log_file).resolve()
        # Ensure parent dirs exist for the log file
        log_file_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file_path))

    logging.basicConfig(
        level=log_level,
        format=format or "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s",
        handlers=handlers,
        force=True
    )

    logger = logging.getLogger(__name__)
    logger.debug(f"Log level set to {log_level_str}, log file: {log_file or 'none'}")
