"""Activity log: queued jobs, finished runs and compatibility decisions."""
import json
import logging
from enum import Enum
from typing import Any, Sequence

from sqlalchemy import desc, select
from sqlalchemy.ext.asyncio import AsyncSession

from app.core import models
from app.worker.jobs import get_current_job_id

logger = logging.getLogger("matchloom.activity")
_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
}


class ActivityKind(str, Enum):
    JOB = "job"
    RUN = "run"
    DECISION = "decision"


def _level(level: str) -> str:
    name = level.upper()
    return "WARNING" if name == "WARN" else name


async def log_activity(
    session: AsyncSession,
    kind: ActivityKind,
    level: str,
    message: str,
    points: int | None = None,
    payload: dict[str, Any] | None = None,
) -> models.Activity:
    payload_obj = dict(payload or {})
    job_id = payload_obj.get("job_id") or get_current_job_id()
    if job_id:
        payload_obj["job_id"] = job_id
    payload_json = json.dumps(payload_obj)
    entry = models.Activity(
        kind=ActivityKind(kind).value,
        level=_level(level),
        points=points,
        message=message,
        payload_json=payload_json,
    )
    session.add(entry)
    await session.commit()
    logger.log(_LEVELS.get(entry.level, logging.INFO), "[%s] %s :: %s", entry.kind, message, payload_json)
    return entry


async def log_decision(session: AsyncSession, points: int, family: str, m1: str, m2: str, compatible: bool, obstruction: str | None) -> models.Activity:
    verdict = "compatible" if compatible else "incompatible"
    return await log_activity(
        session,
        ActivityKind.DECISION,
        "INFO",
        f"{family} on {points} points: {verdict}",
        points=points,
        payload={"family": family, "m1": m1, "m2": m2, "compatible": compatible, "obstruction": obstruction},
    )


async def fetch_recent_activity(
    session: AsyncSession,
    limit: int = 100,
    kind: ActivityKind | None = None,
    level: str | None = None,
    points: int | None = None,
) -> Sequence[models.Activity]:
    stmt = select(models.Activity)
    if kind is not None:
        stmt = stmt.where(models.Activity.kind == ActivityKind(kind).value)
    if level is not None:
        stmt = stmt.where(models.Activity.level == _level(level))
    if points is not None:
        stmt = stmt.where(models.Activity.points == points)
    stmt = stmt.order_by(desc(models.Activity.ts), desc(models.Activity.id)).limit(limit)
    result = await session.execute(stmt)
    return result.scalars().all()
