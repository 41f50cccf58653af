"""Sensor-plane patch grid: assignment, normalization, partition and activity filtering"""

from .patch_grid import (
    GridConfig,
    PatchId,
    NormalizedEvent,
    NormalizedBatch,
    Partition,
    assign_patch,
    normalize,
    normalize_events,
    denormalize,
    partition_sample,
    filter_active,
    threshold_from_rate
)

__all__ = [
    'GridConfig',
    'PatchId',
    'NormalizedEvent',
    'NormalizedBatch',
    'Partition',
    'assign_patch',
    'normalize',
    'normalize_events',
    'denormalize',
    'partition_sample',
    'filter_active',
    'threshold_from_rate'
]
