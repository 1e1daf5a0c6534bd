"""Run history: one row per graph build or suite run."""
import asyncio
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from sqlalchemy import desc, select
from sqlalchemy.ext.asyncio import AsyncSession

from app.core import models
from app.core.config import settings
from app.core.convex import ConvexConfig
from app.core.db import SessionLocal
from app.services.activity_service import ActivityKind, log_activity
from app.services.compat_service import WitnessKind
from app.services.dcg_service import analyze, build_dcg, quotient_by_rotation
from app.services.export_service import export_graph, export_report
from app.services.status_service import progress_reporter, reset_status, set_status
from app.services.verify_service import verify_suite
from app.worker.jobs import get_current_job_id

logger = logging.getLogger("matchloom.runs")


@dataclass
class RunRecord:
    kind: str
    points: int
    target: str
    passed: bool
    summary: dict[str, Any]
    workers: int = 1
    duration_s: float = 0.0


async def record_run(session: AsyncSession, record: RunRecord) -> models.Run:
    row = models.Run(
        kind=record.kind,
        points=record.points,
        target=record.target,
        passed=record.passed,
        workers=record.workers,
        duration_s=round(record.duration_s, 3),
        summary_json=json.dumps(record.summary),
        job_id=get_current_job_id(),
    )
    session.add(row)
    await session.commit()
    await log_activity(
        session,
        ActivityKind.RUN,
        "INFO" if record.passed else "WARNING",
        f"{record.kind} {record.target} on {record.points} points {'passed' if record.passed else 'failed'}",
        points=record.points,
        payload={"run_id": row.id, "duration_s": row.duration_s},
    )
    return row


async def fetch_recent_runs(session: AsyncSession, limit: int = 50, kind: str | None = None) -> Sequence[models.Run]:
    stmt = select(models.Run).order_by(desc(models.Run.created_at), desc(models.Run.id)).limit(limit)
    if kind:
        stmt = stmt.where(models.Run.kind == kind)
    result = await session.execute(stmt)
    return result.scalars().all()


async def latest_run(session: AsyncSession, kind: str, points: int, target: str) -> models.Run | None:
    stmt = (
        select(models.Run)
        .where(models.Run.kind == kind, models.Run.points == points, models.Run.target == target)
        .order_by(desc(models.Run.id))
        .limit(1)
    )
    result = await session.execute(stmt)
    return result.scalars().first()


# ---------------------------------------------------------------------------
# background jobs (run by the worker thread)


async def _persist(record: RunRecord) -> None:
    async with SessionLocal() as session:
        await record_run(session, record)


def exports_dir() -> Path:
    return Path(settings.config_root) / "exports"


def dcg_job(points: int, family: str, workers: int | None = None, unsafe_size: bool = False, quotient: bool = False) -> dict[str, Any]:
    config = ConvexConfig(points)
    kind = WitnessKind.parse(family)
    started = time.perf_counter()
    meta = {"points": points, "family": kind.value}
    try:
        progress = progress_reporter("building", f"{kind.value} graph on {points} points", meta)
        dcg = build_dcg(config, kind, workers, unsafe_size, progress)
        set_status("analyzing", f"{kind.value} graph on {points} points", None, meta)
        report = analyze(dcg)
        payload: dict[str, Any] = {"report": report.as_dict()}
        if quotient:
            payload["quotient"] = quotient_by_rotation(dcg).as_dict()
        payload["export"] = str(export_graph(dcg, exports_dir() / f"{kind.value.lower()}-{points}.json"))
    finally:
        reset_status()
    record = RunRecord("dcg", points, kind.value, True, payload["report"], workers or settings.workers, time.perf_counter() - started)
    asyncio.run(_persist(record))
    return payload


def verify_job(points: int, suite: str, workers: int | None = None, unsafe_size: bool = False) -> dict[str, Any]:
    started = time.perf_counter()
    try:
        progress = progress_reporter("verifying", f"suite {suite} on {points} points", {"points": points, "suite": suite})
        report = verify_suite(ConvexConfig(points), suite, workers, unsafe_size, progress)
        payload = report.as_dict()
        export_report(payload, exports_dir() / f"verify-{suite}-{points}.json")
    finally:
        reset_status()
    record = RunRecord("verify", points, suite, report.passed, payload, workers or settings.workers, time.perf_counter() - started)
    asyncio.run(_persist(record))
    return payload
