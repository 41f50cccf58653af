"""
Patch Grid
Spatial partition of the sensor plane, per-patch activity filtering and local coordinate normalization
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.events.models import Event
from src.utils.errors import ConfigError, EventBoundsError


class GridConfig(BaseModel):
    """Sensor geometry, patch size and activation threshold"""
    sensor_width: int = Field(128, ge=1, description="Sensor width in pixels")
    sensor_height: int = Field(128, ge=1, description="Sensor height in pixels")
    patch_w: int = Field(8, ge=1, description="Patch width in pixels")
    patch_h: int = Field(8, ge=1, description="Patch height in pixels")
    activation_threshold: int = Field(0, ge=0, description="Minimum events per patch per sample")

    model_config = {"frozen": True}

    @property
    def grid_w(self) -> int:
        return math.ceil(self.sensor_width / self.patch_w)

    @property
    def grid_h(self) -> int:
        return math.ceil(self.sensor_height / self.patch_h)

    @property
    def num_patches(self) -> int:
        return self.grid_w * self.grid_h


class PatchId(NamedTuple):
    """Grid cell coordinate"""
    gx: int
    gy: int

    def flat(self, grid_w: int) -> int:
        """Row-major flat index"""
        return self.gy * grid_w + self.gx

    @classmethod
    def from_flat(cls, index: int, grid_w: int) -> 'PatchId':
        gy, gx = divmod(int(index), grid_w)
        return cls(gx, gy)


class NormalizedEvent(NamedTuple):
    """Event with patch-local coordinates in [-1, 1]"""
    t: int
    xn: float
    yn: float
    p: int
    patch: PatchId


@dataclass
class NormalizedBatch:
    """Column-wise normalized events (the vectorized form of NormalizedEvent)"""
    t: np.ndarray
    xn: np.ndarray
    yn: np.ndarray
    p: np.ndarray
    patch: np.ndarray

    def __len__(self) -> int:
        return len(self.t)

    def take(self, index: np.ndarray) -> 'NormalizedBatch':
        return NormalizedBatch(
            t=self.t[index], xn=self.xn[index], yn=self.yn[index],
            p=self.p[index], patch=self.patch[index]
        )


@dataclass
class Partition:
    """Events grouped by patch (flat index to input-order NormalizedBatch) plus per-patch counts"""
    patches: Dict[int, NormalizedBatch] = field(default_factory=dict)
    counts: Dict[int, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())


def assign_patch(cfg: GridConfig, e: Event) -> PatchId:
    """
    Grid cell of one event

    Raises:
        EventBoundsError: If the event lies outside the sensor
    """
    _check_bounds(cfg, np.array([e.x]), np.array([e.y]))
    return PatchId(e.x // cfg.patch_w, e.y // cfg.patch_h)


def normalize(cfg: GridConfig, e: Event) -> NormalizedEvent:
    """
    Map an event's pixel position to [-1, 1] inside its patch

    xn = 2 * (x - gx * patch_w) / (patch_w - 1) - 1, and likewise for y.
    A 1-pixel axis maps to 0.
    """
    patch = assign_patch(cfg, e)
    xn = _normalize_axis(np.array([e.x - patch.gx * cfg.patch_w]), cfg.patch_w)[0]
    yn = _normalize_axis(np.array([e.y - patch.gy * cfg.patch_h]), cfg.patch_h)[0]
    return NormalizedEvent(t=e.t, xn=float(xn), yn=float(yn), p=e.p, patch=patch)


def normalize_events(cfg: GridConfig, events: np.ndarray) -> NormalizedBatch:
    """
    Vectorized assign_patch + normalize over a structured event array

    Returns:
        NormalizedBatch with float32 coordinates and flat patch indices
    """
    x = events['x'].astype(np.int64)
    y = events['y'].astype(np.int64)
    _check_bounds(cfg, x, y)

    gx = x // cfg.patch_w
    gy = y // cfg.patch_h
    return NormalizedBatch(
        t=events['t'].copy(),
        xn=_normalize_axis(x - gx * cfg.patch_w, cfg.patch_w),
        yn=_normalize_axis(y - gy * cfg.patch_h, cfg.patch_h),
        p=events['p'].astype(np.float32),
        patch=gy * cfg.grid_w + gx
    )


def denormalize(cfg: GridConfig, xn: float, yn: float, patch: PatchId) -> Tuple[int, int]:
    """Pixel position for patch-local coordinates (inverse of normalize)"""
    x = patch.gx * cfg.patch_w + (round((xn + 1) * (cfg.patch_w - 1) / 2) if cfg.patch_w > 1 else 0)
    y = patch.gy * cfg.patch_h + (round((yn + 1) * (cfg.patch_h - 1) / 2) if cfg.patch_h > 1 else 0)
    return int(x), int(y)


def partition_sample(cfg: GridConfig, events: np.ndarray) -> Partition:
    """
    Group a sample's events by patch

    Every event lands in exactly one patch list, within-patch order follows
    the input, and the counts sum to the input length.
    """
    batch = normalize_events(cfg, events)
    partition = Partition()
    if len(batch) == 0:
        return partition

    order = np.argsort(batch.patch, kind='stable')
    flat, starts, sizes = np.unique(batch.patch[order], return_index=True, return_counts=True)
    for index, start, size in zip(flat, starts, sizes):
        partition.patches[int(index)] = batch.take(order[start:start + size])
        partition.counts[int(index)] = int(size)
    return partition


def filter_active(cfg: GridConfig, partition: Partition) -> Tuple[List[int], Partition]:
    """
    Drop patches with fewer than activation_threshold events

    Returns:
        (sorted flat indices of active patches, partition restricted to them)
    """
    active = sorted(
        index for index, count in partition.counts.items()
        if count >= cfg.activation_threshold
    )
    kept = Partition(
        patches={index: partition.patches[index] for index in active},
        counts={index: partition.counts[index] for index in active}
    )
    return active, kept


def threshold_from_rate(rate: float, cfg: GridConfig) -> int:
    """
    Absolute activation threshold from a per-pixel activation rate

    Args:
        rate: Events per patch pixel per sample
        cfg: Grid (supplies the nominal patch area)

    Returns:
        ceil(rate * patch_w * patch_h)
    """
    if rate < 0:
        raise ConfigError(f"Activation rate must be non-negative, got {rate}")
    return math.ceil(rate * cfg.patch_w * cfg.patch_h)


def _normalize_axis(local: np.ndarray, size: int) -> np.ndarray:
    if size == 1:
        return np.zeros(len(local), dtype=np.float32)
    return (2.0 * local.astype(np.float64) / (size - 1) - 1.0).astype(np.float32)


def _check_bounds(cfg: GridConfig, x: np.ndarray, y: np.ndarray) -> None:
    bad = np.flatnonzero((x < 0) | (x >= cfg.sensor_width) | (y < 0) | (y >= cfg.sensor_height))
    if bad.size:
        i = int(bad[0])
        raise EventBoundsError(
            f"Event at ({x[i]}, {y[i]}) outside {cfg.sensor_width}x{cfg.sensor_height} sensor",
            {"index": i}
        )
