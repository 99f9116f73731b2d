"""FastAPI application entry point."""

import logging
import time
from contextlib import asynccontextmanager

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from config import get_settings
from routers import bench, problems, solve
from services.suite import catalog

settings = get_settings()

# Configure logging
logging.basicConfig(
    level=getattr(logging, settings.log_level.upper(), logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application startup and shutdown events."""
    logger.info(f"Starting solver service with {len(catalog())} catalog problems")
    settings.output_dir.mkdir(parents=True, exist_ok=True)
    yield
    logger.info("Shutting down solver service...")


app = FastAPI(
    title="Set Optimization Trust Region",
    description="Trust-region and steepest-descent solvers for set-valued optimization",
    version="1.0.0",
    docs_url="/docs" if settings.debug else None,
    redoc_url="/redoc" if settings.debug else None,
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"] if settings.debug else [],
    allow_methods=["GET", "POST"],
    allow_headers=["Content-Type"],
)


@app.middleware("http")
async def log_requests(request: Request, call_next):
    """Log each request with its status and wall time; solves can take seconds."""
    if request.url.path == "/health":
        return await call_next(request)

    started = time.perf_counter()
    response = await call_next(request)
    elapsed_ms = 1000.0 * (time.perf_counter() - started)
    logger.info(f"{request.method} {request.url.path} - Status: {response.status_code} - {elapsed_ms:.1f} ms")
    return response


# Mount routers
app.include_router(problems.router, prefix="/problems", tags=["Problems"])
app.include_router(solve.router, prefix="/solve", tags=["Solve"])
app.include_router(bench.router, prefix="/bench", tags=["Bench"])


@app.get("/health")
async def health_check():
    """Health check endpoint for monitoring."""
    return {"status": "ok", "version": "1.0.0"}


@app.exception_handler(Exception)
async def global_exception_handler(request: Request, exc: Exception):
    """Global exception handler to prevent stack trace leakage."""
    logger.exception(f"Unhandled exception on {request.url.path}: {exc}")
    return JSONResponse(
        status_code=500,
        content={"detail": "Internal server error"},
    )
