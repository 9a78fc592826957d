from fastapi import APIRouter

from motivix import __version__, config

router = APIRouter(prefix="/api", tags=["status"])


@router.get("/version")
def version():
    return {
        "version": __version__,
        "threads": config.THREADS,
        "degreePrimes": config.DEGREE_PRIMES,
        "degreeSamples": config.DEGREE_SAMPLES,
        "degreeSeed": config.DEGREE_SEED,
        "maxFreeCells": config.MAX_FREE_CELLS,
        "apiConcurrency": config.API_CONCURRENCY,
    }
