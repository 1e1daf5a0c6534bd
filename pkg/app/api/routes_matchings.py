from fastapi import APIRouter, HTTPException, Query

from app.api.schemas import MatchingList, MatchingOut
from app.core.convex import ConvexConfig
from app.core.errors import MatchLoomError
from app.services.matching_service import classify_matching, enumerate_matchings, format_matching

router = APIRouter(prefix="/matchings", tags=["matchings"])

# enumeration beyond this is a download, not an API response
MAX_LISTED_POINTS = 16


@router.get("/", response_model=MatchingList)
async def list_matchings(points: int = Query(ge=2, le=MAX_LISTED_POINTS), classify: bool = False):
    try:
        matchings = enumerate_matchings(ConvexConfig(points))
    except MatchLoomError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    return MatchingList(
        points=points,
        count=len(matchings),
        matchings=[
            MatchingOut(index=i, matching=format_matching(m), klass=classify_matching(m).value if classify else None)
            for i, m in enumerate(matchings)
        ],
    )
