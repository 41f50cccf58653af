"""
Token State
Per-patch token memory for asynchronous updates: stored values, last-win steps,
activity counters and the lazily evaluated Old Maximum Value Decay
"""

import math
from typing import Dict, Optional

import numpy as np

from src.alert.models import AlertConfig, CounterMode
from src.grid.patch_grid import GridConfig
from src.utils.errors import EventBoundsError, PreconditionError


class TokenState:
    """
    Fixed-size token memory for one sensor grid

    values[p, j] holds the feature that last won channel j of patch p;
    decay is not written back but evaluated on access from the distance
    between global_step and last_win[p, j]. No event is ever buffered, so
    the footprint depends only on the grid and the token width.
    """

    def __init__(self, num_patches: int, width: int, unset: bool = False, ages: bool = False):
        """
        Initialize a cold state

        Args:
            num_patches: Grid cells
            width: Token width c
            unset: Start channels at -inf (linear final layer) instead of 0
            ages: Keep per-token age counters (per_update counter mode only)
        """
        self.num_patches = num_patches
        self.width = width
        self.unset = unset
        fill = -np.inf if unset else 0.0
        self.values = np.full((num_patches, width), fill, dtype=np.float32)
        self.last_win = np.zeros((num_patches, width), dtype=np.int64)
        self.age: Optional[np.ndarray] = np.zeros((num_patches, width), dtype=np.int64) if ages else None
        self.counts = np.zeros(num_patches, dtype=np.int64)
        self.touched = np.zeros(num_patches, dtype=bool)
        self.global_step = 0

    @classmethod
    def initialize(cls, grid: GridConfig, width: int, unset: bool = False, ages: bool = False) -> 'TokenState':
        return cls(grid.num_patches, width, unset, ages)

    @property
    def nbytes(self) -> int:
        """Bytes held by the state arrays"""
        arrays = (self.values, self.last_win, self.age, self.counts, self.touched)
        return sum(a.nbytes for a in arrays if a is not None)

    def copy(self) -> 'TokenState':
        clone = TokenState.__new__(TokenState)
        clone.num_patches = self.num_patches
        clone.width = self.width
        clone.unset = self.unset
        clone.values = self.values.copy()
        clone.last_win = self.last_win.copy()
        clone.age = None if self.age is None else self.age.copy()
        clone.counts = self.counts.copy()
        clone.touched = self.touched.copy()
        clone.global_step = self.global_step
        return clone

    def check_patch(self, patch: int) -> None:
        if not 0 <= patch < self.num_patches:
            raise EventBoundsError(f"Patch {patch} outside a {self.num_patches}-cell grid", {"patch": patch})

    def effective_values(self, cfg: AlertConfig, step: Optional[int] = None) -> np.ndarray:
        """
        Decayed values of every channel at a global step

        Args:
            cfg: Decay parameters
            step: Global step to evaluate at (default: current)

        Returns:
            (num_patches, c) float64 array
        """
        step = self.global_step if step is None else step
        if cfg.counter_mode == CounterMode.PER_UPDATE:
            return self.values.astype(np.float64)
        return decayed(self.values, step - self.last_win, cfg)

    def effective_value(self, patch: int, channel: int, cfg: AlertConfig) -> float:
        """
        stored * exp(-lambda * max(0, global_step - last_win - N)) for one channel

        Raises:
            EventBoundsError: On an invalid patch
        """
        self.check_patch(patch)
        stored = float(self.values[patch, channel])
        if cfg.counter_mode == CounterMode.PER_UPDATE:
            return stored
        excess = self.global_step - int(self.last_win[patch, channel]) - cfg.n_threshold
        if cfg.lambda_ == 0.0 or excess <= 0:
            return stored
        return stored * math.exp(-cfg.lambda_ * excess)

    def decaying_channels(self, cfg: AlertConfig) -> np.ndarray:
        """(num_patches, c) mask of channels currently past the staleness threshold"""
        if cfg.counter_mode == CounterMode.PER_UPDATE:
            if self.age is None:
                raise PreconditionError("State was created without age counters")
            return self.age > cfg.n_threshold
        return (self.global_step - self.last_win) > cfg.n_threshold

    def to_tensors(self) -> Dict[str, np.ndarray]:
        """Debug dump in WeightArchive naming"""
        return {
            "state.values": self.values.copy(),
            "state.last_win": self.last_win.astype(np.float32),
            "state.counts": self.counts.astype(np.float32)
        }


def decayed(values: np.ndarray, elapsed: np.ndarray, cfg: AlertConfig) -> np.ndarray:
    """
    Closed-form decay of stored values

    Args:
        values: Stored float32 values
        elapsed: Steps since each value's last win (same shape)
        cfg: Decay parameters

    Returns:
        float64 values; untouched where elapsed <= N, lambda == 0 or the value is unset
    """
    out = values.astype(np.float64)
    if cfg.lambda_ == 0.0:
        return out
    excess = elapsed - cfg.n_threshold
    stale = (excess > 0) & np.isfinite(out)
    if np.any(stale):
        out[stale] *= np.exp(-cfg.lambda_ * excess[stale])
    return out


class EagerTokenState:
    """
    Reference replay that materializes decay on every step

    Before each event, every channel that has gone more than N steps without
    a win is multiplied by exp(-lambda); the new feature then wins wherever it
    is at least the current value. Values are kept in float64.
    """

    def __init__(self, num_patches: int, width: int, unset: bool = False):
        fill = -np.inf if unset else 0.0
        self.values = np.full((num_patches, width), fill, dtype=np.float64)
        self.last_win = np.zeros((num_patches, width), dtype=np.int64)
        self.global_step = 0

    def step(self, patch: int, feature: np.ndarray, cfg: AlertConfig) -> None:
        step = self.global_step + 1
        if cfg.lambda_ > 0.0:
            stale = (step - self.last_win) > cfg.n_threshold
            self.values[stale] *= math.exp(-cfg.lambda_)

        row = self.values[patch]
        win = feature.astype(np.float64) >= row
        row[win] = feature[win]
        self.last_win[patch][win] = step
        self.global_step = step


def init_state(grid: GridConfig, width: int, unset: bool = False, ages: bool = False) -> TokenState:
    """Cold TokenState: zero (or unset) values, zero last-win steps and counts, global_step 0"""
    return TokenState.initialize(grid, width, unset, ages)
