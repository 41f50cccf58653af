"""Patch assignment, local normalization, partitioning and activity filtering"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_events
from src.events.models import Event
from src.grid.patch_grid import (
    GridConfig,
    PatchId,
    assign_patch,
    denormalize,
    filter_active,
    normalize,
    normalize_events,
    partition_sample,
    threshold_from_rate
)
from src.utils.errors import ConfigError, EventBoundsError


GRID = GridConfig(sensor_width=37, sensor_height=23, patch_w=5, patch_h=4)


def random_sample(rng, n, grid=GRID):
    t = np.sort(rng.integers(0, 10**6, size=n))
    rows = zip(t, rng.integers(0, grid.sensor_width, n), rng.integers(0, grid.sensor_height, n), rng.choice([-1, 1], n))
    return make_events([tuple(int(v) for v in row) for row in rows])


class TestGeometry:

    def test_partial_edge_patches(self):
        grid = GridConfig(sensor_width=120, sensor_height=100, patch_w=10, patch_h=10)
        assert (grid.grid_w, grid.grid_h, grid.num_patches) == (12, 10, 120)
        assert (GRID.grid_w, GRID.grid_h) == (8, 6)

    def test_flat_index_round_trip(self):
        patch = PatchId(3, 2)
        assert patch.flat(GRID.grid_w) == 19
        assert PatchId.from_flat(19, GRID.grid_w) == patch

    def test_assign_patch(self):
        assert assign_patch(GRID, Event(t=0, x=36, y=22, p=1)) == PatchId(7, 5)

    def test_out_of_bounds(self):
        with pytest.raises(EventBoundsError):
            assign_patch(GRID, Event(t=0, x=37, y=0, p=1))
        with pytest.raises(EventBoundsError):
            normalize_events(GRID, make_events([(0, 0, 23, 1)]))


class TestNormalize:

    def test_exhaustive_patch_pixels(self):
        grid = GridConfig(sensor_width=32, sensor_height=32, patch_w=8, patch_h=8)
        seen_x = set()
        for x in range(8, 16):
            for y in range(16, 24):
                e = normalize(grid, Event(t=0, x=x, y=y, p=1))
                assert e.patch == PatchId(1, 2)
                assert -1.0 <= e.xn <= 1.0 and -1.0 <= e.yn <= 1.0
                assert denormalize(grid, e.xn, e.yn, e.patch) == (x, y)
                seen_x.add(e.xn)
        assert min(seen_x) == -1.0 and max(seen_x) == 1.0

    def test_single_pixel_axis_maps_to_zero(self):
        grid = GridConfig(sensor_width=4, sensor_height=4, patch_w=1, patch_h=4)
        e = normalize(grid, Event(t=0, x=3, y=3, p=1))
        assert e.xn == 0.0 and e.yn == 1.0

    @given(st.lists(st.tuples(st.integers(0, 36), st.integers(0, 22)), min_size=1, max_size=50))
    @settings(max_examples=200)
    def test_normalized_coordinates_bounded(self, xy):
        events = make_events([(i, x, y, 1) for i, (x, y) in enumerate(xy)])
        batch = normalize_events(GRID, events)
        assert np.all(np.abs(batch.xn) <= 1.0)
        assert np.all(np.abs(batch.yn) <= 1.0)
        assert np.all((batch.patch >= 0) & (batch.patch < GRID.num_patches))

    def test_vectorized_matches_scalar(self):
        events = random_sample(np.random.default_rng(0), 200)
        batch = normalize_events(GRID, events)
        for i in range(0, 200, 17):
            row = events[i]
            e = normalize(GRID, Event(t=int(row['t']), x=int(row['x']), y=int(row['y']), p=int(row['p'])))
            assert (e.xn, e.yn) == (batch.xn[i], batch.yn[i])
            assert e.patch.flat(GRID.grid_w) == batch.patch[i]


class TestPartition:

    def test_counts_conserve_events(self):
        events = random_sample(np.random.default_rng(1), 500)
        partition = partition_sample(GRID, events)
        assert partition.total == 500
        assert sum(len(b) for b in partition.patches.values()) == 500
        for index, batch in partition.patches.items():
            assert np.all(batch.patch == index)
            assert np.all(np.diff(batch.t.astype(np.int64)) >= 0)

    def test_empty_sample(self):
        partition = partition_sample(GRID, make_events([]))
        assert partition.total == 0 and partition.patches == {}

    def test_active_set_monotone_in_threshold(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            events = random_sample(rng, int(rng.integers(1, 80)))
            partition = partition_sample(GRID, events)
            previous = None
            for threshold in (0, 1, 2, 4, 8):
                grid = GRID.model_copy(update={'activation_threshold': threshold})
                active, kept = filter_active(grid, partition)
                assert active == sorted(kept.patches)
                assert all(kept.counts[i] >= threshold for i in active)
                if previous is not None:
                    assert set(active) <= set(previous)
                previous = active

    def test_filter_active_idempotent(self):
        rng = np.random.default_rng(4)
        for threshold in (0, 1, 3, 6):
            grid = GRID.model_copy(update={'activation_threshold': threshold})
            partition = partition_sample(grid, random_sample(rng, 120))
            active, kept = filter_active(grid, partition)
            again, kept_again = filter_active(grid, kept)
            assert again == active
            assert kept_again.counts == kept.counts
            assert kept_again.patches.keys() == kept.patches.keys()

    def test_threshold_from_rate(self):
        grid = GridConfig(patch_w=8, patch_h=8)
        assert threshold_from_rate(0.05, grid) == 4
        assert threshold_from_rate(0.0, grid) == 0
        with pytest.raises(ConfigError):
            threshold_from_rate(-0.1, grid)
