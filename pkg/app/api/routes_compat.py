from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.ext.asyncio import AsyncSession

from app.api.schemas import CompatRequest, CompatResult, ObstructionOut, RouteRequest, RouteResult, RouteStepOut
from app.core.db import get_session
from app.core.errors import MatchLoomError, SizeLimitError
from app.services.activity_service import log_decision
from app.services.compat_service import WitnessKind, brute_force_oracle, exists_witness, find_obstruction
from app.services.construction_service import RotationSequence, caterpillar_path_between, tree_path_between
from app.services.matching_service import format_matching, parse_matching

router = APIRouter(tags=["compat"])


def _parse_pair(points: int, m1: str, m2: str):
    try:
        return parse_matching(m1, points), parse_matching(m2, points)
    except MatchLoomError as exc:
        raise HTTPException(status_code=400, detail=str(exc))


def sequence_out(seq: RotationSequence, family: str) -> RouteResult:
    return RouteResult(
        family=family,
        length=len(seq),
        steps=[
            RouteStepOut(
                before=format_matching(step.before),
                after=format_matching(step.after),
                witness=[str(e) for e in step.witness.edges],
                witness_kind=step.witness.kind.value,
                rotated=[sorted(str(e) for e in sc.members) for sc in step.semicycles],
                searched=step.searched,
            )
            for step in seq.steps
        ],
    )


@router.post("/compat", response_model=CompatResult)
async def decide(req: CompatRequest, session: AsyncSession = Depends(get_session)):
    m1, m2 = _parse_pair(req.points, req.m1, req.m2)
    kind = WitnessKind.parse(req.family)
    witness = exists_witness(m1, m2, kind)
    result = CompatResult(family=kind.value, compatible=witness is not None)
    if witness is not None and req.witness:
        result.witness = [str(e) for e in witness.edges]
        result.witness_kind = witness.kind.value
    if witness is None:
        found = find_obstruction(m1, m2, kind)
        if found is not None:
            result.obstruction = ObstructionOut(kind=found.kind.value, detail=found.detail)
    if req.oracle:
        try:
            result.oracle = brute_force_oracle(m1, m2, kind)
        except SizeLimitError as exc:
            raise HTTPException(status_code=413, detail=str(exc))
    obstruction = result.obstruction.kind if result.obstruction else None
    await log_decision(session, req.points, kind.value, format_matching(m1), format_matching(m2), result.compatible, obstruction)
    return result


@router.post("/route", response_model=RouteResult)
async def route(req: RouteRequest):
    m1, m2 = _parse_pair(req.points, req.m1, req.m2)
    try:
        if req.family == "tree":
            seq = tree_path_between(m1, m2)
        else:
            seq = caterpillar_path_between(m1, m2, one_legged=req.family == "onelegged")
    except MatchLoomError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return sequence_out(seq, WitnessKind.parse(req.family).value)
