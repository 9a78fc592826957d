from fastapi import APIRouter
from pydantic import BaseModel

from api.services.engine_service import run_report
from motivix.cli import run_conv_table, run_decide
from motivix.cmlat import ModelFile
from motivix.decomp import DecisionMode, TraceLevel

router = APIRouter(prefix="/api", tags=["decide"])


class DecideRequest(BaseModel):
    model: ModelFile
    mode: DecisionMode = DecisionMode.PROOFTRACE
    trace: TraceLevel = TraceLevel.STEPS


class ConvTableRequest(BaseModel):
    model: ModelFile


@router.post("/decide")
async def decide(request: DecideRequest):
    return await run_report(run_decide, request.model, request.mode.value, request.trace.value)


@router.post("/conv-table")
async def conv_table(request: ConvTableRequest):
    return await run_report(run_conv_table, request.model)
