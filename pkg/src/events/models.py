"""
Event Stream Models
Event tuples, stream headers, sample windows and the in-memory stream container
"""

from enum import Enum
from typing import Iterator, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from src.utils.errors import EventBoundsError, StreamOrderError


# Mirrors the 16-byte binary record: t u64, x u16, y u16, p i8, 3 pad bytes
EVENT_DTYPE = np.dtype({
    'names': ['t', 'x', 'y', 'p'],
    'formats': ['<u8', '<u2', '<u2', 'i1'],
    'offsets': [0, 8, 10, 12],
    'itemsize': 16
})


class InputMode(str, Enum):
    """Temporal sampling mode"""
    CCIM = "ccim"
    CTIM = "ctim"


class Event(BaseModel):
    """One sensor event"""
    t: int = Field(..., ge=0, description="Timestamp in microseconds")
    x: int = Field(..., ge=0, lt=2**16, description="Pixel column")
    y: int = Field(..., ge=0, lt=2**16, description="Pixel row")
    p: int = Field(..., description="Polarity, -1 or +1")

    @field_validator('p')
    @classmethod
    def validate_polarity(cls, v: int) -> int:
        """Reject 0 and any other value instead of coercing"""
        if v not in (-1, 1):
            raise ValueError("Polarity must be -1 or +1")
        return v

    model_config = {
        "frozen": True,
        "json_schema_extra": {
            "examples": [{"t": 12, "x": 3, "y": 4, "p": -1}]
        }
    }


class StreamHeader(BaseModel):
    """Sensor geometry plus payload summary"""
    sensor_width: int = Field(..., ge=1, lt=2**16, description="Sensor width in pixels")
    sensor_height: int = Field(..., ge=1, lt=2**16, description="Sensor height in pixels")
    event_count: int = Field(0, ge=0, description="Number of events in the payload")
    duration: int = Field(0, ge=0, description="Last minus first timestamp in microseconds")


class SampleWindow(BaseModel):
    """Position and extent of one CCIM/CTIM sample"""
    mode: InputMode
    ne: Optional[int] = Field(None, ge=1, description="Event count (CCIM)")
    delta_t: Optional[int] = Field(None, ge=1, description="Window length in microseconds (CTIM)")
    start_index: int = Field(0, ge=0, description="Index of the first event in the stream")
    start_time: int = Field(0, ge=0, description="Window start in microseconds")
    event_count: int = Field(0, ge=0, description="Events inside the window")
    duration: int = Field(0, ge=0, description="T = t_last - t_first of the window")

    @model_validator(mode='after')
    def check_mode_fields(self) -> 'SampleWindow':
        if self.mode == InputMode.CCIM and self.ne is None:
            raise ValueError("CCIM window requires ne")
        if self.mode == InputMode.CTIM and self.delta_t is None:
            raise ValueError("CTIM window requires delta_t")
        return self


def events_from_records(records) -> np.ndarray:
    """
    Build a structured event array from (t, x, y, p) tuples or Event models

    Args:
        records: Iterable of Event or 4-tuples

    Returns:
        Structured array with EVENT_DTYPE
    """
    rows = [
        (r.t, r.x, r.y, r.p) if isinstance(r, Event) else tuple(r)
        for r in records
    ]
    array = np.zeros(len(rows), dtype=EVENT_DTYPE)
    if rows:
        t, x, y, p = zip(*rows)
        array['t'] = t
        array['x'] = x
        array['y'] = y
        array['p'] = p
    return array


class EventStream:
    """
    Immutable event stream: header plus structured event array

    Streams are validated on construction (bounds, polarity, ordering) and
    frozen afterwards, so any number of readers may share one instance.
    """

    def __init__(self, header: StreamHeader, events: np.ndarray, validate: bool = True):
        events = np.ascontiguousarray(events, dtype=EVENT_DTYPE)
        if validate:
            validate_events(events, header.sensor_width, header.sensor_height)

        duration = int(events['t'][-1] - events['t'][0]) if len(events) else 0
        self.header = header.model_copy(update={
            'event_count': len(events),
            'duration': duration
        })
        events.setflags(write=False)
        self.events = events

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[Event]:
        for row in self.events:
            yield Event(t=int(row['t']), x=int(row['x']), y=int(row['y']), p=int(row['p']))

    @property
    def t(self) -> np.ndarray:
        return self.events['t']

    @property
    def start_time(self) -> int:
        return int(self.events['t'][0]) if len(self.events) else 0

    @property
    def end_time(self) -> int:
        return int(self.events['t'][-1]) if len(self.events) else 0


def validate_events(events: np.ndarray, sensor_width: int, sensor_height: int) -> None:
    """
    Check bounds, polarity and timestamp order of a structured event array

    Raises:
        EventBoundsError: On coordinates outside the sensor or invalid polarity
        StreamOrderError: On a timestamp regression
    """
    if len(events) == 0:
        return

    bad = np.flatnonzero((events['x'] >= sensor_width) | (events['y'] >= sensor_height))
    if bad.size:
        i = int(bad[0])
        raise EventBoundsError(
            f"Event {i} at ({events['x'][i]}, {events['y'][i]}) outside "
            f"{sensor_width}x{sensor_height} sensor",
            {"index": i}
        )

    bad = np.flatnonzero((events['p'] != 1) & (events['p'] != -1))
    if bad.size:
        i = int(bad[0])
        raise EventBoundsError(f"Event {i} has polarity {events['p'][i]}", {"index": i})

    regress = np.flatnonzero(np.diff(events['t'].astype(np.int64)) < 0)
    if regress.size:
        i = int(regress[0]) + 1
        raise StreamOrderError(
            f"Timestamp regression at event {i}: {events['t'][i]} < {events['t'][i - 1]}",
            {"index": i}
        )
