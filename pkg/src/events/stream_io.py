"""
Event Stream I/O
Binary ("EVT1") and CSV codecs for event streams
"""

import io
import struct
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from src.events.models import EVENT_DTYPE, EventStream, StreamHeader, validate_events
from src.utils.errors import ConfigError, StreamFormatError, StreamOrderError


STREAM_MAGIC = b"EVT1"
STREAM_VERSION = 1
RECORD_SIZE = EVENT_DTYPE.itemsize

_HEADER = struct.Struct("<4sIHHQ")
HEADER_SIZE = _HEADER.size

CSV_COLUMNS = ["t", "x", "y", "p"]


class StreamFormat(str, Enum):
    """On-disk event stream format"""
    BINARY = "binary"
    CSV = "csv"

    @classmethod
    def from_path(cls, path: Union[str, Path]) -> 'StreamFormat':
        """Infer the format from the file suffix (.csv or anything else)"""
        return cls.CSV if Path(path).suffix.lower() == ".csv" else cls.BINARY


def read_stream(
    path: Union[str, Path],
    stream_format: Optional[StreamFormat] = None,
    sensor_size: Optional[Tuple[int, int]] = None
) -> EventStream:
    """
    Read an event stream from disk

    Args:
        path: Stream file
        stream_format: binary or csv (inferred from suffix when omitted)
        sensor_size: (width, height) for CSV files written without a geometry comment

    Returns:
        EventStream with header counts matching the payload

    Raises:
        ConfigError: If the file does not exist
        StreamFormatError: On malformed records (with byte offset or line number)
        EventBoundsError: On coordinates outside the sensor
        StreamOrderError: On timestamp regressions
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Event stream not found: {path}", {"path": str(path)})

    stream_format = StreamFormat(stream_format) if stream_format else StreamFormat.from_path(path)
    if stream_format == StreamFormat.BINARY:
        stream = _read_binary(path.read_bytes())
    else:
        stream = _read_csv(path.read_text(encoding="utf-8"), sensor_size)

    logger.debug(
        f"Read {stream.header.event_count} events from {path} "
        f"({stream.header.sensor_width}x{stream.header.sensor_height}, {stream.header.duration} us)"
    )
    return stream


def write_stream(
    stream: Union[EventStream, np.ndarray],
    header: Optional[StreamHeader],
    path: Union[str, Path],
    stream_format: Optional[StreamFormat] = None
) -> None:
    """
    Write an event stream to disk

    Args:
        stream: EventStream or structured event array
        header: Sensor geometry (taken from the stream when None)
        path: Output file
        stream_format: binary or csv (inferred from suffix when omitted)

    Raises:
        StreamOrderError: If events are not sorted by timestamp
        EventBoundsError: If coordinates exceed the header bounds
    """
    if isinstance(stream, EventStream):
        events = stream.events
        header = header or stream.header
    else:
        events = np.ascontiguousarray(stream, dtype=EVENT_DTYPE)
    if header is None:
        raise ConfigError("write_stream needs a header for raw event arrays")

    validate_events(events, header.sensor_width, header.sensor_height)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stream_format = StreamFormat(stream_format) if stream_format else StreamFormat.from_path(path)

    if stream_format == StreamFormat.BINARY:
        path.write_bytes(encode_binary(events, header))
    else:
        path.write_text(encode_csv(events, header), encoding="utf-8")

    logger.debug(f"Wrote {len(events)} events to {path}")


def encode_binary(events: np.ndarray, header: StreamHeader) -> bytes:
    """Serialize header plus 16-byte records"""
    head = _HEADER.pack(
        STREAM_MAGIC,
        STREAM_VERSION,
        header.sensor_width,
        header.sensor_height,
        len(events)
    )
    # Re-pack into a zeroed buffer so pad bytes are always zero
    records = np.zeros(len(events), dtype=EVENT_DTYPE)
    for name in CSV_COLUMNS:
        records[name] = events[name]
    return head + records.tobytes()


def _read_binary(buffer: bytes) -> EventStream:
    if len(buffer) < HEADER_SIZE:
        raise StreamFormatError("Truncated stream header", {"offset": len(buffer)})

    magic, version, width, height, count = _HEADER.unpack_from(buffer, 0)
    if magic != STREAM_MAGIC:
        raise StreamFormatError(f"Bad stream magic {magic!r}", {"offset": 0})
    if version != STREAM_VERSION:
        raise StreamFormatError(f"Unsupported stream version {version}", {"offset": 4})

    try:
        header = StreamHeader(sensor_width=width, sensor_height=height)
    except ValidationError:
        raise StreamFormatError(f"Bad sensor geometry {width}x{height}", {"offset": 8})

    payload = len(buffer) - HEADER_SIZE
    if payload != count * RECORD_SIZE:
        complete = min(count, payload // RECORD_SIZE)
        raise StreamFormatError(
            f"Header announces {count} records but payload holds {payload} bytes",
            {"offset": HEADER_SIZE + complete * RECORD_SIZE}
        )

    raw = np.frombuffer(buffer, dtype=np.uint8, offset=HEADER_SIZE).reshape(count, RECORD_SIZE)
    dirty = np.flatnonzero(raw[:, 13:].any(axis=1))
    if dirty.size:
        i = int(dirty[0])
        raise StreamFormatError(
            f"Non-zero pad bytes in record {i}",
            {"offset": HEADER_SIZE + i * RECORD_SIZE + 13}
        )

    events = np.frombuffer(buffer, dtype=EVENT_DTYPE, count=count, offset=HEADER_SIZE).copy()
    bad = np.flatnonzero((events['p'] != 1) & (events['p'] != -1))
    if bad.size:
        i = int(bad[0])
        raise StreamFormatError(
            f"Record {i} has polarity {events['p'][i]}",
            {"offset": HEADER_SIZE + i * RECORD_SIZE + 12}
        )

    return EventStream(header, events)


def encode_csv(events: np.ndarray, header: StreamHeader) -> str:
    """Serialize as a geometry comment, the 't,x,y,p' header and one line per event"""
    frame = pd.DataFrame({name: events[name] for name in CSV_COLUMNS})
    body = frame.to_csv(index=False, lineterminator="\n")
    return f"# sensor={header.sensor_width}x{header.sensor_height}\n{body}"


def _read_csv(text: str, sensor_size: Optional[Tuple[int, int]]) -> EventStream:
    lines = text.splitlines()
    first_data_line = 1

    if lines and lines[0].startswith("#"):
        geometry = lines[0][1:].strip()
        try:
            key, value = geometry.split("=", 1)
            width, height = (int(v) for v in value.split("x"))
            if key.strip() != "sensor":
                raise ValueError(key)
        except ValueError:
            raise StreamFormatError(f"Bad geometry comment '{lines[0]}'", {"line": 1})
        sensor_size = (width, height)
        lines = lines[1:]
        first_data_line = 2

    if sensor_size is None:
        raise ConfigError("CSV stream has no '# sensor=WxH' comment and no sensor_size was given")

    if not lines or lines[0].strip() != ",".join(CSV_COLUMNS):
        raise StreamFormatError("Missing 't,x,y,p' header line", {"line": first_data_line})

    try:
        frame = pd.read_csv(io.StringIO("\n".join(lines)), dtype=str, skip_blank_lines=False)
    except pd.errors.ParserError as e:
        raise StreamFormatError(f"Malformed CSV: {e}", {"line": first_data_line})

    events = np.zeros(len(frame), dtype=EVENT_DTYPE)
    for name in CSV_COLUMNS:
        numeric = pd.to_numeric(frame[name], errors="coerce")
        invalid = numeric.isna() | (numeric != numeric.round())
        if name != "p":
            invalid |= numeric < 0
        else:
            invalid |= ~numeric.isin([-1, 1])
        if invalid.any():
            row = int(np.flatnonzero(invalid.to_numpy())[0])
            raise StreamFormatError(
                f"Bad value in column '{name}': {frame[name].iloc[row]!r}",
                {"line": first_data_line + 1 + row}
            )
        events[name] = numeric.to_numpy()

    try:
        header = StreamHeader(sensor_width=sensor_size[0], sensor_height=sensor_size[1])
    except ValidationError:
        raise ConfigError(f"Bad sensor geometry {sensor_size[0]}x{sensor_size[1]}", {"line": 1})

    try:
        return EventStream(header, events)
    except StreamOrderError as e:
        e.details["line"] = first_data_line + 1 + e.details["index"]
        raise
