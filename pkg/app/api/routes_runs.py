from typing import Literal, Optional

from fastapi import APIRouter, Depends, HTTPException, Query
from sqlalchemy.ext.asyncio import AsyncSession

from app.api.schemas import RunOut
from app.core.db import get_session
from app.core.errors import MatchLoomError
from app.services.compat_service import WitnessKind
from app.services.run_service import fetch_recent_runs, latest_run

router = APIRouter(prefix="/runs", tags=["runs"])


@router.get("/", response_model=list[RunOut])
async def recent_runs(
    limit: int = Query(default=50, ge=1, le=500),
    kind: Optional[Literal["dcg", "verify"]] = None,
    session: AsyncSession = Depends(get_session),
):
    return await fetch_recent_runs(session, limit=limit, kind=kind)


@router.get("/latest", response_model=RunOut)
async def last_run(
    kind: Literal["dcg", "verify"],
    points: int = Query(ge=2),
    target: str = Query(description="family for dcg runs, suite id for verify runs"),
    session: AsyncSession = Depends(get_session),
):
    if kind == "dcg":
        try:
            target = WitnessKind.parse(target).value
        except MatchLoomError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
    run = await latest_run(session, kind, points, target)
    if run is None:
        raise HTTPException(status_code=404, detail="No matching run recorded")
    return run
