"""Event stream models, codecs, sampling windows and the synthetic generator"""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st
from pydantic import ValidationError

from conftest import make_events, make_stream
from src.events.models import Event, EventStream, StreamHeader
from src.events.sampling import iter_ccim, iter_ctim, random_ccim_windows, sample_ccim, sample_ctim
from src.events.stream_io import HEADER_SIZE, RECORD_SIZE, encode_binary, read_stream, write_stream
from src.events.synthetic import GeneratorConfig, generate_synthetic
from src.utils.errors import ConfigError, EventBoundsError, StreamExhausted, StreamFormatError, StreamOrderError


def sorted_rows(width=64, height=48, max_size=60):
    row = st.tuples(
        st.integers(0, 2**40),
        st.integers(0, width - 1),
        st.integers(0, height - 1),
        st.sampled_from([-1, 1])
    )
    return st.lists(row, min_size=1, max_size=max_size).map(lambda rows: sorted(rows, key=lambda r: r[0]))


class TestEventModels:

    def test_polarity_zero_rejected(self):
        with pytest.raises(ValidationError):
            Event(t=0, x=0, y=0, p=0)

    def test_stream_rejects_regression(self):
        with pytest.raises(StreamOrderError) as excinfo:
            make_stream([(5, 0, 0, 1), (3, 0, 0, 1)])
        assert excinfo.value.details["index"] == 1

    def test_stream_rejects_out_of_bounds(self):
        with pytest.raises(EventBoundsError):
            make_stream([(0, 32, 0, 1)])

    def test_header_counts_follow_payload(self):
        stream = make_stream([(10, 1, 1, 1), (15, 2, 2, -1), (40, 3, 3, 1)])
        assert stream.header.event_count == 3
        assert stream.header.duration == 30
        assert [e.p for e in stream] == [1, -1, 1]

    def test_stream_is_frozen(self):
        stream = make_stream([(0, 1, 1, 1)])
        with pytest.raises(ValueError):
            stream.events['t'][0] = 9


class TestStreamIO:

    @given(sorted_rows())
    @settings(max_examples=40, suppress_health_check=[HealthCheck.function_scoped_fixture])
    def test_binary_and_csv_round_trip(self, tmp_path, rows):
        stream = make_stream(rows, width=64, height=48)
        for name in ("s.evt", "s.csv"):
            write_stream(stream, None, tmp_path / name)
            loaded = read_stream(tmp_path / name)
            assert loaded.header == stream.header
            assert np.array_equal(loaded.events, stream.events)

    def test_truncated_payload_reports_offset(self, tmp_path):
        stream = make_stream([(0, 1, 1, 1), (1, 2, 2, 1), (2, 3, 3, -1)])
        data = encode_binary(stream.events, stream.header)
        (tmp_path / "cut.evt").write_bytes(data[:-5])
        with pytest.raises(StreamFormatError) as excinfo:
            read_stream(tmp_path / "cut.evt")
        assert excinfo.value.details["offset"] == HEADER_SIZE + 2 * RECORD_SIZE

    def test_bad_magic(self, tmp_path):
        stream = make_stream([(0, 1, 1, 1)])
        data = b"XXXX" + encode_binary(stream.events, stream.header)[4:]
        (tmp_path / "bad.evt").write_bytes(data)
        with pytest.raises(StreamFormatError) as excinfo:
            read_stream(tmp_path / "bad.evt")
        assert excinfo.value.details["offset"] == 0

    def test_dirty_pad_bytes(self, tmp_path):
        stream = make_stream([(0, 1, 1, 1)])
        data = bytearray(encode_binary(stream.events, stream.header))
        data[HEADER_SIZE + 13] = 7
        (tmp_path / "pad.evt").write_bytes(bytes(data))
        with pytest.raises(StreamFormatError) as excinfo:
            read_stream(tmp_path / "pad.evt")
        assert excinfo.value.details["offset"] == HEADER_SIZE + 13

    def test_zero_width_header(self, tmp_path):
        stream = make_stream([(0, 1, 1, 1)])
        data = bytearray(encode_binary(stream.events, stream.header))
        data[8:10] = b"\x00\x00"
        (tmp_path / "flat.evt").write_bytes(bytes(data))
        with pytest.raises(StreamFormatError) as excinfo:
            read_stream(tmp_path / "flat.evt")
        assert excinfo.value.details["offset"] == 8

    def test_csv_bad_value_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# sensor=4x4\nt,x,y,p\n0,1,1,1\n5,1,x,1\n")
        with pytest.raises(StreamFormatError) as excinfo:
            read_stream(path)
        assert excinfo.value.details["line"] == 4

    def test_csv_regression_line(self, tmp_path):
        path = tmp_path / "order.csv"
        path.write_text("# sensor=4x4\nt,x,y,p\n0,1,1,1\n5,1,1,1\n3,1,1,1\n")
        with pytest.raises(StreamOrderError) as excinfo:
            read_stream(path)
        assert excinfo.value.details["line"] == 5

    def test_csv_without_geometry_needs_sensor_size(self, tmp_path):
        path = tmp_path / "plain.csv"
        path.write_text("t,x,y,p\n0,1,1,1\n")
        with pytest.raises(ConfigError):
            read_stream(path)
        assert len(read_stream(path, sensor_size=(4, 4))) == 1

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError) as excinfo:
            read_stream(tmp_path / "nope.evt")
        assert "nope.evt" in excinfo.value.details["path"]


class TestSampling:

    def test_ccim_exact_count(self, small_stream):
        window, events = sample_ccim(small_stream, 100, start_index=50)
        assert len(events) == window.event_count == 100
        assert window.duration == int(events['t'][-1] - events['t'][0])
        assert window.start_time == int(small_stream.t[50])

    def test_ccim_exhausted(self, small_stream):
        with pytest.raises(StreamExhausted):
            sample_ccim(small_stream, 100, start_index=len(small_stream) - 10)

    def test_iter_ccim_drops_tail(self, small_stream):
        windows = list(iter_ccim(small_stream, 300))
        assert len(windows) == len(small_stream) // 300
        assert all(len(events) == 300 for _, events in windows)

    def test_ctim_half_open_window(self):
        stream = make_stream([(0, 1, 1, 1), (10, 1, 1, 1), (20, 1, 1, 1), (30, 1, 1, 1)])
        window, events = sample_ctim(stream, 20, 10)
        assert list(events['t']) == [10, 20]
        assert window.event_count == 2

    def test_iter_ctim_covers_stream(self, small_stream):
        windows = list(iter_ctim(small_stream, 15_000))
        assert sum(len(events) for _, events in windows) == len(small_stream)
        for window, events in windows:
            assert np.all(events['t'] >= window.start_time)
            assert np.all(events['t'] < window.start_time + 15_000)

    def test_iter_ctim_keeps_empty_bins(self):
        stream = make_stream([(0, 1, 1, 1), (100, 1, 1, 1)])
        counts = [w.event_count for w, _ in iter_ctim(stream, 30)]
        assert counts == [1, 0, 0, 1]

    def test_random_windows_are_seeded(self, small_stream):
        a = random_ccim_windows(small_stream, 64, 5, seed=11)
        b = random_ccim_windows(small_stream, 64, 5, seed=11)
        assert [w.start_index for w, _ in a] == [w.start_index for w, _ in b]


class TestSynthetic:

    def test_exact_count_and_order(self):
        stream = generate_synthetic(GeneratorConfig(sensor_width=40, sensor_height=30, rate_hz=10_000, duration_us=300_000), 1)
        assert len(stream) == 3000
        assert np.all(np.diff(stream.t.astype(np.int64)) >= 0)
        assert stream.events['x'].max() < 40 and stream.events['y'].max() < 30

    def test_deterministic(self):
        cfg = GeneratorConfig(rate_hz=5_000, duration_us=100_000)
        assert np.array_equal(generate_synthetic(cfg, 4).events, generate_synthetic(cfg, 4).events)

    def test_class_changes_trajectory(self):
        base = dict(rate_hz=5_000, duration_us=500_000, num_classes=4)
        a = generate_synthetic(GeneratorConfig(class_id=0, **base), 4)
        b = generate_synthetic(GeneratorConfig(class_id=2, **base), 4)
        assert not np.array_equal(a.events, b.events)

    def test_zero_rate_rejected(self):
        with pytest.raises(ConfigError):
            generate_synthetic(GeneratorConfig(rate_hz=0), 0)

    def test_class_id_bound(self):
        with pytest.raises(ValidationError):
            GeneratorConfig(class_id=2, num_classes=2)


def test_events_from_records_accepts_models():
    events = make_events([Event(t=1, x=2, y=3, p=-1), (4, 5, 6, 1)])
    assert list(events['t']) == [1, 4]
    assert list(events['p']) == [-1, 1]


def test_header_bounds():
    with pytest.raises(ValidationError):
        StreamHeader(sensor_width=0, sensor_height=10)
    stream = EventStream(StreamHeader(sensor_width=2, sensor_height=2), make_events([]))
    assert len(stream) == 0 and stream.header.duration == 0
