from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.ext.asyncio import AsyncSession

from app.api.schemas import DcgRequest, JobOut, JobQueued, VerifyRequest
from app.core.db import get_session
from app.core.errors import SizeLimitError
from app.services.activity_service import ActivityKind, log_activity
from app.services.compat_service import WitnessKind
from app.services.dcg_service import size_limit
from app.services.run_service import dcg_job, verify_job
from app.services.verify_service import SUITES
from app.worker.jobs import enqueue, job_result, job_status

router = APIRouter(tags=["dcg"])

# suites that only build tree graphs; the rest need the tighter path-family bound
TREE_ONLY_SUITES = {"tree-diameter", "tree-lower-bound", "shared-perimeter", "small-sizes", "constructions-vs-bfs", "conjecture-diameter"}


def _guard(points: int, family: WitnessKind, unsafe_size: bool):
    limit = size_limit(family)
    if points % 2:
        raise HTTPException(status_code=400, detail=f"point count must be even (got {points})")
    if points > limit and not unsafe_size:
        raise HTTPException(status_code=413, detail=str(SizeLimitError(points, limit, f"{family.value} graph construction")))


async def _log_queued(session: AsyncSession, job_id: str, name: str, points: int):
    await log_activity(session, ActivityKind.JOB, "INFO", f"queued {name}", points=points, payload={"job_id": job_id})


@router.post("/dcg", response_model=JobQueued)
async def build(req: DcgRequest, session: AsyncSession = Depends(get_session)):
    family = WitnessKind.parse(req.family)
    _guard(req.points, family, req.unsafe_size)
    name = f"dcg_{family.value}_{req.points}"
    job_id = enqueue(
        name,
        lambda: dcg_job(req.points, family.value, req.workers, req.unsafe_size, req.quotient),
    )
    await _log_queued(session, job_id, name, req.points)
    return JobQueued(job_id=job_id, status="queued")


@router.post("/verify", response_model=JobQueued)
async def verify(req: VerifyRequest, session: AsyncSession = Depends(get_session)):
    if req.suite not in SUITES:
        raise HTTPException(status_code=400, detail=f"unknown suite {req.suite!r}")
    _guard(req.points, WitnessKind.TREE if req.suite in TREE_ONLY_SUITES else WitnessKind.PATH, req.unsafe_size)
    name = f"verify_{req.suite}_{req.points}"
    job_id = enqueue(name, lambda: verify_job(req.points, req.suite, req.workers, req.unsafe_size))
    await _log_queued(session, job_id, name, req.points)
    return JobQueued(job_id=job_id, status="queued")


@router.get("/verify/suites")
async def suites():
    return {"suites": list(SUITES)}


@router.get("/jobs/{job_id}", response_model=JobOut)
async def get_job(job_id: str):
    status = job_status(job_id)
    if status is None:
        raise HTTPException(status_code=404, detail="unknown job")
    return JobOut(job_id=job_id, status=status, result=job_result(job_id))
