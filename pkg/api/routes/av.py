from typing import Any, Literal

from fastapi import APIRouter
from pydantic import BaseModel

from api.services.engine_service import run_report
from motivix.cli import run_av
from motivix.cmlat import ModelFile

router = APIRouter(prefix="/api/av", tags=["av"])


class AvRequest(BaseModel):
    model: ModelFile
    scan: bool = False
    matrix: list[list[Any]] | None = None
    A: list[int] = []
    B: list[int] = []


@router.post("/{query}")
async def av(query: Literal["exponents", "integral", "liverpool"], request: AvRequest):
    if query == "exponents":
        params: dict[str, Any] = {"scan": request.scan}
    elif query == "integral":
        params = {"matrix": request.matrix or []}
    else:
        params = {"A": request.A, "B": request.B}
    return await run_report(run_av, query, request.model, params)
