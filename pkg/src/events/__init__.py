"""Event stream representation, file I/O, synthetic generation and temporal sampling"""

from .models import (
    EVENT_DTYPE,
    Event,
    EventStream,
    InputMode,
    SampleWindow,
    StreamHeader,
    events_from_records
)
from .stream_io import StreamFormat, read_stream, write_stream
from .synthetic import GeneratorConfig, generate_synthetic
from .sampling import sample_ccim, sample_ctim, iter_ccim, iter_ctim, random_ccim_windows

__all__ = [
    'EVENT_DTYPE',
    'Event',
    'EventStream',
    'InputMode',
    'SampleWindow',
    'StreamHeader',
    'events_from_records',
    'StreamFormat',
    'read_stream',
    'write_stream',
    'GeneratorConfig',
    'generate_synthetic',
    'sample_ccim',
    'sample_ctim',
    'iter_ccim',
    'iter_ctim',
    'random_ccim_windows'
]
