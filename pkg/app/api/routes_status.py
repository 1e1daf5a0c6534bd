from fastapi import APIRouter

from app.services.status_service import get_status
from app.worker.queue import job_queue, running_jobs

router = APIRouter(prefix="/status", tags=["status"])


@router.get("/")
async def current_status():
    return {
        "status": get_status(),
        "queue_depth": job_queue.qsize(),
        "running_jobs": running_jobs(),
    }
