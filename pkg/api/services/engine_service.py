import asyncio
import logging
from typing import Any, Callable

from fastapi.responses import JSONResponse
from starlette import status

from motivix import config
from motivix.errors import (
    CandidateError,
    HypothesisError,
    InvalidInput,
    LatticeError,
    MotivixError,
    OracleError,
    PreconditionError,
    RankError,
    ReductionError,
    ShapeError,
    UnsupportedQuery,
)
from motivix.report import Report

logger = logging.getLogger(__name__)

# most specific first; HypothesisError is a PreconditionError
STATUS_BY_ERROR: list[tuple[type[MotivixError], int]] = [
    (HypothesisError, status.HTTP_409_CONFLICT),
    (PreconditionError, status.HTTP_409_CONFLICT),
    (InvalidInput, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (ShapeError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (CandidateError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (LatticeError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (RankError, status.HTTP_422_UNPROCESSABLE_ENTITY),
    (UnsupportedQuery, status.HTTP_400_BAD_REQUEST),
    (ReductionError, status.HTTP_500_INTERNAL_SERVER_ERROR),
    (OracleError, status.HTTP_500_INTERNAL_SERVER_ERROR),
]

_semaphore: asyncio.Semaphore | None = None


def _get_semaphore() -> asyncio.Semaphore:
    global _semaphore
    if _semaphore is None:
        _semaphore = asyncio.Semaphore(config.API_CONCURRENCY)
    return _semaphore


def status_for(exc: MotivixError) -> int:
    for error_type, code in STATUS_BY_ERROR:
        if isinstance(exc, error_type):
            return code
    return status.HTTP_500_INTERNAL_SERVER_ERROR


def error_response(exc: MotivixError) -> JSONResponse:
    return JSONResponse(
        status_code=status_for(exc),
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


async def run_report(func: Callable[..., Any], *args: Any) -> JSONResponse:
    """Run an engine command off the event loop and wrap its Report as JSON.

    `func` returns either a Report or a (Report, exit_code) pair; the exit code
    travels along as the "exit_code" field so clients see UNDECIDED outcomes.
    """
    async with _get_semaphore():
        try:
            outcome = await asyncio.wait_for(asyncio.to_thread(func, *args), config.API_TIMEOUT_SECONDS)
        except MotivixError as exc:
            logger.info("%s failed: %s: %s", getattr(func, "__name__", func), type(exc).__name__, exc)
            return error_response(exc)
        except asyncio.TimeoutError:
            logger.warning("%s exceeded %ss", getattr(func, "__name__", func), config.API_TIMEOUT_SECONDS)
            return JSONResponse(
                status_code=status.HTTP_504_GATEWAY_TIMEOUT,
                content={"error": "Timeout", "detail": f"computation exceeded {config.API_TIMEOUT_SECONDS}s"},
            )

    report, exit_code = outcome if isinstance(outcome, tuple) else (outcome, 0)
    if not isinstance(report, Report):
        raise TypeError(f"{func!r} did not return a Report")
    return JSONResponse(status_code=status.HTTP_200_OK, content={**report.to_json(), "exit_code": exit_code})
