"""
Pydantic Models for the Readout API
Request and response schemas for FastAPI endpoints
"""

from datetime import datetime
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from src.events.models import Event


class EventBatch(BaseModel):
    """Request model for POST /events"""
    events: List[Event] = Field(..., description="Events in arrival order")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "events": [
                        {"t": 1000, "x": 12, "y": 40, "p": 1},
                        {"t": 1004, "x": 13, "y": 40, "p": -1}
                    ]
                }
            ]
        }
    }


class IngestResponse(BaseModel):
    """Result of absorbing one batch"""
    accepted: int = Field(..., ge=0, description="Events absorbed")
    global_step: int = Field(..., ge=0, description="Global step after the batch")


class SnapshotResponse(BaseModel):
    """Active tokens at one global step"""
    step: int = Field(..., ge=0, description="Global step the tokens reflect")
    patches: List[int] = Field(..., description="Flat patch indices in row-major order")
    tokens: List[List[float]] = Field(..., description="One c-vector per active patch")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {"step": 2, "patches": [81], "tokens": [[0.12, -0.4, 0.9]]}
            ]
        }
    }


class ResetResponse(BaseModel):
    """State after POST /reset"""
    status: str = Field(..., description="'reset'")
    global_step: int = Field(0, ge=0)


class HealthResponse(BaseModel):
    """Health check response"""
    status: str = Field(..., description="Service status")
    timestamp: datetime = Field(..., description="Current server time")
    version: str = Field(..., description="API version")
    services: Dict[str, bool] = Field(..., description="Status of loaded components")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "status": "healthy",
                    "timestamp": "2026-10-19T10:30:00Z",
                    "version": "1.0.0",
                    "services": {
                        "engine": True,
                        "head": True,
                        "trained_weights": False
                    }
                }
            ]
        }
    }


class ErrorResponse(BaseModel):
    """Error response model"""
    error: str = Field(..., description="Error type")
    message: str = Field(..., description="Human-readable error message")
    details: Optional[Dict[str, Any]] = Field(None, description="Additional error details")
    timestamp: datetime = Field(..., description="When error occurred")

    model_config = {
        "json_schema_extra": {
            "examples": [
                {
                    "error": "OrderError",
                    "message": "Timestamp 900 arrives after 1004",
                    "details": {"step": 3},
                    "timestamp": "2026-10-19T10:30:00Z"
                }
            ]
        }
    }
