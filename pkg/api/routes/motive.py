from typing import Any, Literal

from fastapi import APIRouter
from pydantic import BaseModel, Field

from api.services.engine_service import run_report
from motivix.cli import run_motive

router = APIRouter(prefix="/api/motive", tags=["motive"])

MotiveKind = Literal["curve", "surface", "product", "elliptic-curve", "hypersurface", "blowup", "cubic-ledger"]


class MotiveRequest(BaseModel):
    """Keyword parameters of the chosen table, e.g. {"g": 10} or {"n": 4, "d": 3}."""

    params: dict[str, Any] = Field(default_factory=dict)


@router.post("/{kind}")
async def motive(kind: MotiveKind, request: MotiveRequest):
    return await run_report(run_motive, kind, request.params)
