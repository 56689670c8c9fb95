import logging
import sys

from backend.cli import create_parser, main
from backend.settings import app_settings

logging.basicConfig(
    level=getattr(logging, app_settings.runtime.log_level.upper(), logging.INFO),
    format="%(asctime)s %(levelname)s %(name)s: %(message)s",
)

__all__ = ["create_parser", "main"]


if __name__ == "__main__":
    sys.exit(main())
