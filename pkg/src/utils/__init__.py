"""Shared plumbing: errors, logging setup and the weight archive codec"""

from .errors import (
    AlertError,
    StreamFormatError,
    StreamOrderError,
    EventBoundsError,
    ConfigError,
    UsageError,
    NumericError,
    PreconditionError,
    StreamExhausted,
    DegenerateInputError
)
from .weight_archive import WeightArchive, read_archive, write_archive
from .log_setup import configure_logging

__all__ = [
    'AlertError',
    'StreamFormatError',
    'StreamOrderError',
    'EventBoundsError',
    'ConfigError',
    'UsageError',
    'NumericError',
    'PreconditionError',
    'StreamExhausted',
    'DegenerateInputError',
    'WeightArchive',
    'read_archive',
    'write_archive',
    'configure_logging'
]
