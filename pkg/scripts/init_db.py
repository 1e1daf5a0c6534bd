"""Create the run-history database under MLOOM_CONFIG_ROOT."""
import logging
import sys
from pathlib import Path

ROOT_DIR = Path(__file__).resolve().parents[1]
if str(ROOT_DIR) not in sys.path:
    sys.path.insert(0, str(ROOT_DIR))

from app.core.config import settings
from app.core.db import db_path, init_db_sync
from app.core.logging_utils import setup_logging

if __name__ == "__main__":
    setup_logging(Path(settings.config_root))
    init_db_sync()
    logging.getLogger("matchloom.db").info("Database ready at %s", db_path)
