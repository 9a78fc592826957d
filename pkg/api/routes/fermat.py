from fastapi import APIRouter, Path, Query

from api.services.engine_service import run_report
from motivix.cli import run_fermat

router = APIRouter(prefix="/api/fermat", tags=["fermat"])


@router.get("/pullback/{phi}")
async def pullback(phi: int = Path(..., ge=1, le=3)):
    return await run_report(run_fermat, "pullback", phi)


@router.get("/degrees")
async def degrees():
    return await run_report(run_fermat, "degrees")


@router.get("/instance")
async def instance(decide: bool = Query(False)):
    return await run_report(run_fermat, "instance", 1, None, decide)
