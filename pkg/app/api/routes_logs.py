from pathlib import Path
from typing import Literal

from fastapi import APIRouter, Query

from app.core.config import settings as env_settings
from app.core.logging_utils import DEBUG_LOG, MAIN_LOG, log_dir, tail_log

router = APIRouter(prefix="/logs", tags=["logs"])


@router.get("/")
async def read_logs(level: Literal["info", "debug"] = Query(default="info"), lines: int = Query(default=200, ge=1, le=1000)):
    root = Path(env_settings.config_root)
    path = log_dir(root) / (MAIN_LOG if level == "info" else DEBUG_LOG)
    return {
        "path": str(path),
        "level": level,
        "exists": path.exists(),
        "lines": tail_log(root, debug=level == "debug", lines=lines),
    }
