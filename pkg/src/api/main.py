"""
FastAPI Readout Service
Feeds a live asynchronous token engine and serves on-demand snapshots and predictions
"""

import os
from contextlib import asynccontextmanager
from datetime import datetime
from typing import Optional

from dotenv import load_dotenv
from fastapi import FastAPI, status
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from loguru import logger

from src.alert.engine import AlertEngine
from src.api.models import (
    ErrorResponse,
    EventBatch,
    HealthResponse,
    IngestResponse,
    ResetResponse,
    SnapshotResponse
)
from src.events.models import events_from_records, validate_events
from src.harness.config import Settings, load_settings, weights_path
from src.harness.pipeline import load_models
from src.head.classifier import classify
from src.head.models import Prediction
from src.head.transformer import HeadWeights
from src.utils.errors import AlertError, EventBoundsError, StreamOrderError
from src.utils.log_setup import configure_logging

# Load environment variables
load_dotenv()

# Initialize logger
configure_logging(log_file=os.getenv("ALERT_LOG_FILE"))

API_VERSION = "1.0.0"

# Global instances (initialized on startup)
settings: Optional[Settings] = None
engine: Optional[AlertEngine] = None
head_weights: Optional[HeadWeights] = None
trained_weights = False


def _status_for(exc: AlertError) -> int:
    if isinstance(exc, StreamOrderError):
        return status.HTTP_409_CONFLICT
    if isinstance(exc, EventBoundsError):
        return status.HTTP_422_UNPROCESSABLE_ENTITY
    return status.HTTP_400_BAD_REQUEST


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Startup and shutdown events"""
    global settings, engine, head_weights, trained_weights

    logger.info("Starting readout service...")
    try:
        settings = load_settings()
        path = weights_path()
        embedder, head_weights = load_models(settings, path)
        trained_weights = path is not None
        engine = AlertEngine(embedder, settings.alert)
        logger.info(
            f"Engine ready: {settings.grid.grid_w}x{settings.grid.grid_h} patches, "
            f"width {settings.embedder.token_width}"
        )
    except AlertError as e:
        logger.error(f"Startup failed: {e.to_line()}")
        raise

    yield

    logger.info(f"Shutting down readout service at step {engine.global_step if engine else 0}")


# Create FastAPI app
app = FastAPI(
    title="ALERT Readout API",
    description="Asynchronous event-camera token engine with on-demand readout",
    version=API_VERSION,
    lifespan=lifespan
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.exception_handler(AlertError)
async def alert_exception_handler(request, exc: AlertError):
    """Engine errors become ErrorResponse bodies"""
    logger.warning(f"Request rejected: {exc.to_line()}")
    return JSONResponse(
        status_code=_status_for(exc),
        content=ErrorResponse(
            error=exc.code,
            message=exc.message,
            details=exc.details or None,
            timestamp=datetime.now()
        ).model_dump(mode='json')
    )


@app.exception_handler(Exception)
async def global_exception_handler(request, exc):
    """Global exception handler"""
    logger.error(f"Unhandled exception: {str(exc)}")
    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content=ErrorResponse(
            error="InternalServerError",
            message=str(exc),
            timestamp=datetime.now()
        ).model_dump(mode='json')
    )


@app.get("/", tags=["Root"])
async def root():
    """Root endpoint"""
    return {
        "service": "ALERT Readout API",
        "version": API_VERSION,
        "status": "running",
        "docs": "/docs",
        "health": "/health"
    }


@app.get("/health", response_model=HealthResponse, tags=["Health"])
async def health_check():
    """
    Health check endpoint
    Returns status of the engine, the head and whether trained weights are loaded
    """
    services_status = {
        "engine": engine is not None,
        "head": head_weights is not None,
        "trained_weights": trained_weights
    }
    ready = services_status["engine"] and services_status["head"]

    return HealthResponse(
        status="healthy" if all(services_status.values()) else ("degraded" if ready else "unavailable"),
        timestamp=datetime.now(),
        version=API_VERSION,
        services=services_status
    )


@app.post("/events", response_model=IngestResponse, tags=["Engine"])
async def post_events(batch: EventBatch):
    """
    Absorb events in arrival order

    The whole batch is validated before any event touches the state, so a
    rejected batch leaves the tokens unchanged.

    Returns:
        IngestResponse with the new global step

    Raises:
        409 on a timestamp regression, 422 on coordinates outside the sensor
    """
    events = events_from_records(batch.events)
    validate_events(events, settings.grid.sensor_width, settings.grid.sensor_height)
    step = engine.ingest(events)
    return IngestResponse(accepted=len(events), global_step=step)


@app.get("/snapshot", response_model=SnapshotResponse, tags=["Engine"])
async def get_snapshot():
    """Active tokens at the current global step; does not modify the state"""
    snapshot = engine.snapshot()
    return SnapshotResponse(
        step=snapshot.step,
        patches=snapshot.patches.tolist(),
        tokens=snapshot.tokens.astype(float).tolist()
    )


@app.get("/predict", response_model=Prediction, tags=["Engine"])
async def get_prediction():
    """Classify the current snapshot"""
    return classify(settings.head, head_weights, engine.snapshot())


@app.post("/reset", response_model=ResetResponse, tags=["Engine"])
async def reset_engine():
    """Discard all tokens and restart the clock"""
    engine.reset()
    logger.info("Engine state reset")
    return ResetResponse(status="reset", global_step=engine.global_step)


if __name__ == "__main__":
    import uvicorn

    uvicorn.run(
        "src.api.main:app",
        host=os.getenv("API_HOST", "0.0.0.0"),
        port=int(os.getenv("API_PORT", "8000")),
        reload=False
    )
