"""
Temporal Sampling
Constant Count (CCIM) and Constant Time (CTIM) input windows over an event stream
"""

from typing import Iterator, List, Tuple

import numpy as np
from loguru import logger

from src.events.models import EventStream, InputMode, SampleWindow
from src.utils.errors import PreconditionError, StreamExhausted


def sample_ccim(stream: EventStream, ne: int, start_index: int = 0) -> Tuple[SampleWindow, np.ndarray]:
    """
    Take exactly ne consecutive events

    Args:
        stream: Source stream
        ne: Events per sample (>= 1)
        start_index: Index of the first event

    Returns:
        (window, event slice) where window.duration = t_last - t_first

    Raises:
        StreamExhausted: If fewer than ne events remain; padding is the caller's call
    """
    if ne < 1:
        raise PreconditionError(f"CCIM needs ne >= 1, got {ne}")
    if start_index < 0 or start_index + ne > len(stream):
        raise StreamExhausted(
            f"Only {max(0, len(stream) - start_index)} events left, window needs {ne}",
            {"start_index": start_index, "ne": ne}
        )

    events = stream.events[start_index:start_index + ne]
    window = SampleWindow(
        mode=InputMode.CCIM,
        ne=ne,
        start_index=start_index,
        start_time=int(events['t'][0]),
        event_count=ne,
        duration=int(events['t'][-1] - events['t'][0])
    )
    return window, events


def sample_ctim(stream: EventStream, delta_t: int, start_time: int) -> Tuple[SampleWindow, np.ndarray]:
    """
    Take every event with start_time <= t < start_time + delta_t

    Args:
        stream: Source stream
        delta_t: Window length in microseconds (>= 1)
        start_time: Window start in microseconds

    Returns:
        (window, event slice); the slice may be empty
    """
    if delta_t < 1:
        raise PreconditionError(f"CTIM needs delta_t >= 1 us, got {delta_t}")

    t = stream.t
    lo = int(np.searchsorted(t, np.uint64(start_time), side='left'))
    hi = int(np.searchsorted(t, np.uint64(start_time + delta_t), side='left'))
    events = stream.events[lo:hi]

    window = SampleWindow(
        mode=InputMode.CTIM,
        delta_t=delta_t,
        start_index=lo,
        start_time=start_time,
        event_count=hi - lo,
        duration=int(events['t'][-1] - events['t'][0]) if hi > lo else 0
    )
    return window, events


def iter_ccim(stream: EventStream, ne: int) -> Iterator[Tuple[SampleWindow, np.ndarray]]:
    """Consecutive CCIM windows over the whole stream; a short tail is dropped with a warning"""
    start = 0
    while start + ne <= len(stream):
        yield sample_ccim(stream, ne, start)
        start += ne

    if start < len(stream):
        logger.warning(f"Dropping {len(stream) - start} tail events shorter than ne={ne}")


def iter_ctim(stream: EventStream, delta_t: int) -> Iterator[Tuple[SampleWindow, np.ndarray]]:
    """Adjacent CTIM bins from the first event to the last, empty bins included"""
    if len(stream) == 0:
        return

    start = stream.start_time
    while start <= stream.end_time:
        yield sample_ctim(stream, delta_t, start)
        start += delta_t


def random_ccim_windows(stream: EventStream, ne: int, count: int, seed: int) -> List[Tuple[SampleWindow, np.ndarray]]:
    """
    Draw CCIM windows at random start indices

    Args:
        stream: Source stream
        ne: Events per window
        count: Number of windows
        seed: RNG seed

    Returns:
        List of (window, event slice)
    """
    if ne > len(stream):
        raise StreamExhausted(f"Stream of {len(stream)} events cannot hold a window of {ne}")

    rng = np.random.default_rng(seed)
    starts = rng.integers(0, len(stream) - ne + 1, size=count)
    return [sample_ccim(stream, ne, int(s)) for s in starts]
