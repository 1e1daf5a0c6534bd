import logging
import queue
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Callable
from uuid import uuid4

from app.core.config import settings

logger = logging.getLogger("matchloom.worker")

FINISHED = ("done", "failed")


@dataclass
class Job:
    id: str
    name: str
    fn: Callable[[], Any]


job_queue: "queue.Queue[Job]" = queue.Queue()
# finished jobs move to the end, so the oldest finished job is the first one met
job_status: "OrderedDict[str, str]" = OrderedDict()
# return values of finished jobs (graph reports, suite reports) or the error text
job_results: dict[str, Any] = {}
_status_lock = threading.Lock()


def enqueue_job(name: str, fn: Callable[[], Any]) -> str:
    job_id = str(uuid4())
    with _status_lock:
        job_status[job_id] = "queued"
    job_queue.put(Job(id=job_id, name=name, fn=fn))
    logger.debug("Enqueued job %s (%s)", job_id, name)
    return job_id


def _evict_finished() -> None:
    """Forget the oldest finished jobs beyond ``settings.job_history``; queued and running jobs stay."""
    finished = [jid for jid, st in job_status.items() if st in FINISHED]
    for jid in finished[: max(0, len(finished) - settings.job_history)]:
        del job_status[jid]
        job_results.pop(jid, None)
        logger.debug("Evicted finished job %s", jid)


def set_status(job_id: str, status: str, result: Any = None):
    with _status_lock:
        job_status[job_id] = status
        if result is not None:
            job_results[job_id] = result
        if status in FINISHED:
            job_status.move_to_end(job_id)
            _evict_finished()


def get_status(job_id: str) -> str | None:
    with _status_lock:
        return job_status.get(job_id)


def get_result(job_id: str) -> Any:
    with _status_lock:
        return job_results.get(job_id)


def running_jobs() -> list[str]:
    with _status_lock:
        return [jid for jid, st in job_status.items() if st == "running"]
