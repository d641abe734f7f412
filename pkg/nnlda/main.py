import logging
import sys

from dotenv import load_dotenv

# Load environment variables (LOG_LEVEL, NNLDA_CONFIG_DIR, ...) from .env
load_dotenv()

from nnlda.logging_config import setup_logging

setup_logging()
logger = logging.getLogger(__name__)


def main() -> int:
    from nnlda.cli import run

    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
