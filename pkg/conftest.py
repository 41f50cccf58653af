"""Shared fixtures: a small sensor, seeded synthetic streams and random weights"""

import numpy as np
import pytest

from src.alert.models import ScheduleMode
from src.embedder.models import MlpConfig
from src.events.models import EVENT_DTYPE, EventStream, StreamHeader, events_from_records
from src.events.synthetic import generate_synthetic
from src.grid.patch_grid import GridConfig
from src.harness.config import GenerationConfig, ReadoutConfig, SamplingConfig, Settings
from src.harness.pipeline import load_models
from src.head.models import HeadConfig


SMALL_CONFIG = """\
grid.sensor_width=32
grid.sensor_height=32
grid.patch_w=8
grid.patch_h=8
mlp.depth=2
mlp.base_channels=8
mlp.out_channels=16
head.layers=1
head.heads=2
head.token_width=16
head.num_classes=3
gen.rate_hz=20000
gen.duration_us=200000
sample.ne=512
sample.windows=5
readout.mode=time
readout.every=20000
"""


@pytest.fixture(scope="session")
def small_settings() -> Settings:
    """32x32 sensor with 8x8 patches, 16-wide tokens, 3 classes"""
    return Settings(
        grid=GridConfig(sensor_width=32, sensor_height=32, patch_w=8, patch_h=8),
        mlp=MlpConfig(depth=2, base_channels=8, out_channels=16),
        head=HeadConfig(layers=1, heads=2, token_width=16, num_classes=3),
        gen=GenerationConfig(rate_hz=20_000, duration_us=200_000),
        sample=SamplingConfig(ne=512, windows=5),
        readout=ReadoutConfig(mode=ScheduleMode.TIME, every=20_000)
    )


@pytest.fixture
def small_config_file(tmp_path):
    """The small settings written as a config file"""
    path = tmp_path / "small.env"
    path.write_text(SMALL_CONFIG)
    return path


@pytest.fixture(scope="session")
def small_stream(small_settings) -> EventStream:
    """4000 class-0 events over 200 ms"""
    return generate_synthetic(small_settings.generator(0), seed=7)


@pytest.fixture(scope="session")
def small_models(small_settings):
    """(Embedder, HeadWeights) with seeded random weights"""
    return load_models(small_settings, None, seed=3)


@pytest.fixture
def embedder(small_models):
    return small_models[0]


@pytest.fixture
def head_weights(small_models):
    return small_models[1]


def make_events(rows) -> np.ndarray:
    """Structured events from (t, x, y, p) tuples"""
    return events_from_records(rows)


def make_stream(rows, width: int = 32, height: int = 32) -> EventStream:
    events = make_events(rows) if rows else np.zeros(0, dtype=EVENT_DTYPE)
    return EventStream(StreamHeader(sensor_width=width, sensor_height=height), events)
