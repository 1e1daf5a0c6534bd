from fastapi import APIRouter

from app.core.config import APP_VERSION, settings

router = APIRouter(tags=["health"])


@router.get("/health")
async def health():
    return {
        "status": "ok",
        "version": APP_VERSION,
        "workers": settings.workers,
        "limits": {"tree": settings.tree_max_points, "path": settings.path_max_points, "oracle": settings.oracle_max_points},
    }
