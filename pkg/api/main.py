import logging
import os

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette import status

from api.routes import av, decide, fermat, motive
from api.routes import status as status_routes
from api.services.engine_service import error_response
from motivix import __version__, config
from motivix.errors import MotivixError

# ---- GLOBAL CONFIG ----
config.configure_logging(os.getenv("MOTIVIX_LOG_LEVEL", "INFO"))
logger = logging.getLogger(__name__)

app = FastAPI(title="motivix", version=__version__)
app.add_middleware(
    CORSMiddleware,
    allow_origins=config.ALLOWED_ORIGINS,
    allow_credentials="*" not in config.ALLOWED_ORIGINS,
    allow_methods=["*"],
    allow_headers=["*"],
)
app.include_router(decide.router)
app.include_router(motive.router)
app.include_router(av.router)
app.include_router(fermat.router)
app.include_router(status_routes.router)


@app.exception_handler(MotivixError)
async def motivix_error_handler(request: Request, exc: MotivixError):
    return error_response(exc)


@app.exception_handler(Exception)
async def unexpected_error_handler(request: Request, exc: Exception):
    logger.exception("Unhandled error on %s", request.url.path)
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.get("/health")
def health():
    return {"status": "ok", "version": __version__}
