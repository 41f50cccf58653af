"""
Time Encoding
Bounded sinusoidal representation of absolute timestamps, plus the LERT time-origin shift
"""

import math
from typing import Tuple

import numpy as np

from src.embedder.models import TimeEncodingConfig
from src.utils.errors import PreconditionError


US_TO_S = 1e-6


def encode_time(cfg: TimeEncodingConfig, t: int) -> Tuple[float, float]:
    """
    Encode one timestamp

    t_x = alpha * cos(2 pi f t_s + phi), t_y = alpha * sin(2 pi f t_s + phi)
    with t_s = t * 1e-6 seconds.

    Args:
        cfg: Encoding parameters (must be enabled)
        t: Timestamp in microseconds

    Returns:
        (t_x, t_y), always on the circle of radius alpha
    """
    if not cfg.enabled:
        raise PreconditionError("Time encoding is disabled (LERT mode)")

    angle = 2.0 * math.pi * cfg.f_hz * (t * US_TO_S) + cfg.phi
    return cfg.alpha * math.cos(angle), cfg.alpha * math.sin(angle)


def encode_times(cfg: TimeEncodingConfig, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized encode_time over microsecond timestamps (float64 result)"""
    angle = 2.0 * np.pi * cfg.f_hz * (t.astype(np.float64) * US_TO_S) + cfg.phi
    return cfg.alpha * np.cos(angle), cfg.alpha * np.sin(angle)


def shift_time_origin(events: np.ndarray) -> np.ndarray:
    """
    Shift a sample so its first event sits at t = 0

    Args:
        events: Structured event array sorted by t

    Returns:
        Copy with t' = t - t_first (the minimum for sorted input), so t' lies in [0, T]

    Raises:
        PreconditionError: On an empty slice
    """
    if len(events) == 0:
        raise PreconditionError("Cannot shift the time origin of an empty sample")

    shifted = events.copy()
    shifted['t'] = events['t'] - events['t'].min()
    return shifted
