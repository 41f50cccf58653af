"""
Error Types
Exception hierarchy shared by every ALERT module
"""

from typing import Any, Dict, Optional


class AlertError(Exception):
    """Base class for all engine errors"""

    code = "AlertError"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """
        Initialize error

        Args:
            message: Human-readable description
            details: Extra machine-readable context (offsets, paths, indices)
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_line(self) -> str:
        """Render as a single key=value line for the CLI"""
        parts = [f"error={self.code}", f'message="{self.message}"']
        parts.extend(f"{key}={value}" for key, value in self.details.items())
        return " ".join(parts)


class StreamFormatError(AlertError):
    """Malformed binary record, CSV line, or archive section"""
    code = "FormatError"


class StreamOrderError(AlertError):
    """Timestamp regression inside a stream"""
    code = "OrderError"


class EventBoundsError(AlertError):
    """Event coordinate or patch id outside the configured sensor/grid"""
    code = "ValidationError"


class ConfigError(AlertError):
    """Invalid configuration, tensor shape mismatch, or missing resource"""
    code = "ConfigError"


class UsageError(AlertError):
    """Unknown config key or command-line flag"""
    code = "UsageError"


class NumericError(AlertError):
    """Non-finite values produced by a forward pass"""
    code = "NumericError"


class PreconditionError(AlertError):
    """Operation called on input it is not defined for"""
    code = "PreconditionError"


class StreamExhausted(AlertError):
    """Not enough events left for a constant-count window"""
    code = "StreamExhausted"


class DegenerateInputError(AlertError):
    """Empty token sequence handed to the encoder"""
    code = "DegenerateInput"
