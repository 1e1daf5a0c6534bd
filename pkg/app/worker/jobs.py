import logging
import threading
import traceback

from .queue import Job, enqueue_job, get_result, get_status, job_queue, set_status

logger = logging.getLogger("matchloom.worker")
_worker_started = False
_job_ctx = threading.local()


def get_current_job_id() -> str | None:
    return getattr(_job_ctx, "job_id", None)


def run_job(job: Job) -> None:
    set_status(job.id, "running")
    logger.debug("Worker starting job %s (%s)", job.id, job.name)
    try:
        _job_ctx.job_id = job.id
        result = job.fn()
        set_status(job.id, "done", result)
        logger.info("Job %s (%s) done", job.id, job.name)
    except Exception as exc:
        set_status(job.id, "failed", {"error": str(exc)})
        logger.error("Job failed %s: %s", job.name, traceback.format_exc())
    finally:
        _job_ctx.job_id = None


def start_worker():
    global _worker_started
    if _worker_started:
        return
    _worker_started = True

    def run():
        while True:
            job = job_queue.get()
            try:
                run_job(job)
            finally:
                job_queue.task_done()

    threading.Thread(target=run, daemon=True, name="matchloom-worker").start()
    logger.info("Worker started")


def enqueue(name: str, fn):
    return enqueue_job(name, fn)


def job_status(job_id: str) -> str | None:
    return get_status(job_id)


def job_result(job_id: str):
    return get_result(job_id)
