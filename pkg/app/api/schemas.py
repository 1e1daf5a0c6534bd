from datetime import datetime
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

Family = Literal["tree", "caterpillar", "onelegged", "path"]


class ActivityOut(BaseModel):
    id: int
    ts: datetime
    kind: str
    level: str
    points: int | None = None
    message: str
    payload_json: str

    class Config:
        from_attributes = True


class RunOut(BaseModel):
    id: int
    kind: str
    points: int
    target: str
    passed: bool
    workers: int
    duration_s: float
    summary_json: str
    job_id: Optional[str] = None
    created_at: datetime

    class Config:
        from_attributes = True


class MatchingOut(BaseModel):
    index: int
    matching: str
    klass: Optional[str] = None


class MatchingList(BaseModel):
    points: int
    count: int
    matchings: List[MatchingOut]


class CompatRequest(BaseModel):
    points: int = Field(ge=2)
    m1: str
    m2: str
    family: Family = "tree"
    witness: bool = False
    oracle: bool = False


class ObstructionOut(BaseModel):
    kind: str
    detail: str


class CompatResult(BaseModel):
    family: str
    compatible: bool
    witness: Optional[List[str]] = None
    witness_kind: Optional[str] = None
    obstruction: Optional[ObstructionOut] = None
    oracle: Optional[bool] = None


class RouteRequest(BaseModel):
    points: int = Field(ge=10)
    m1: str
    m2: str
    family: Literal["tree", "caterpillar", "onelegged"] = "tree"


class RouteStepOut(BaseModel):
    before: str
    after: str
    witness: List[str]
    witness_kind: str
    rotated: List[List[str]]
    searched: bool


class RouteResult(BaseModel):
    family: str
    length: int
    steps: List[RouteStepOut]


class DcgRequest(BaseModel):
    points: int = Field(ge=2)
    family: Family = "tree"
    workers: Optional[int] = Field(default=None, ge=1)
    quotient: bool = False
    unsafe_size: bool = False


class VerifyRequest(BaseModel):
    points: int = Field(ge=2)
    suite: str
    workers: Optional[int] = Field(default=None, ge=1)
    unsafe_size: bool = False


class JobQueued(BaseModel):
    job_id: str
    status: str


class JobOut(BaseModel):
    job_id: str
    status: str
    result: Optional[Dict[str, Any]] = None
