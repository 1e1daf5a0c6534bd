from pathlib import Path

from fastapi import FastAPI

from app.api.routes_activity import router as activity_router
from app.api.routes_compat import router as compat_router
from app.api.routes_dcg import router as dcg_router
from app.api.routes_health import router as health_router
from app.api.routes_logs import router as logs_router
from app.api.routes_matchings import router as matchings_router
from app.api.routes_runs import router as runs_router
from app.api.routes_status import router as status_router
from app.core.config import APP_VERSION, settings as env_settings
from app.core.db import init_db
from app.core.logging_utils import setup_logging
from app.worker.jobs import start_worker

app = FastAPI(title="MatchLoom", version=APP_VERSION)


@app.on_event("startup")
async def startup():
    setup_logging(Path(env_settings.config_root), debug_enabled=env_settings.debug_logging)
    await init_db()
    start_worker()


app.include_router(health_router, prefix="/api")
app.include_router(activity_router, prefix="/api")
app.include_router(logs_router, prefix="/api")
app.include_router(status_router, prefix="/api")
app.include_router(matchings_router, prefix="/api")
app.include_router(compat_router, prefix="/api")
app.include_router(dcg_router, prefix="/api")
app.include_router(runs_router, prefix="/api")
