"""ALRT tensor archive and error line rendering"""

import numpy as np
import pytest

from src.utils.errors import ConfigError, EventBoundsError, StreamFormatError
from src.utils.weight_archive import WeightArchive, read_archive, write_archive


def sample_tensors():
    rng = np.random.default_rng(0)
    return {
        "fg.layer0.weight": rng.normal(size=(12, 5)).astype(np.float32),
        "fg.layer0.bias": rng.normal(size=12).astype(np.float32),
        "snapshot0.tokens": np.zeros((0, 16), dtype=np.float32),
        "scalar": np.array(2.5, dtype=np.float32),
        "pos.table": np.arange(24, dtype=np.float32).reshape(2, 3, 4)
    }


def test_exact_round_trip(tmp_path):
    tensors = sample_tensors()
    path = tmp_path / "nested" / "w.alrt"
    write_archive(tensors, path)
    archive = read_archive(path)

    assert list(archive) == list(tensors)
    for name, value in tensors.items():
        assert archive[name].dtype == np.float32
        assert archive[name].shape == value.shape
        assert np.array_equal(archive[name], value)


def test_tensors_are_read_only():
    archive = WeightArchive({"a": np.ones(3)})
    assert archive["a"].dtype == np.float32
    with pytest.raises(ValueError):
        archive["a"][0] = 2.0


def test_scalar_keeps_zero_dims(tmp_path):
    assert WeightArchive({"s": np.float32(1.5)})["s"].shape == ()

    path = tmp_path / "s.alrt"
    write_archive({"s": np.array(-0.25, dtype=np.float32)}, path)
    # header 12, name length 2, name 1, ndim 1, payload 4
    assert len(path.read_bytes()) == 20
    restored = read_archive(path)["s"]
    assert restored.shape == ()
    assert restored == np.float32(-0.25)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError) as excinfo:
        read_archive(tmp_path / "none.alrt")
    assert excinfo.value.details["path"].endswith("none.alrt")


def test_bad_magic_and_version(tmp_path):
    path = tmp_path / "w.alrt"
    write_archive(sample_tensors(), path)
    data = bytearray(path.read_bytes())

    path.write_bytes(b"XXXX" + bytes(data[4:]))
    with pytest.raises(StreamFormatError) as excinfo:
        read_archive(path)
    assert excinfo.value.details["offset"] == 0

    data[4] = 9
    path.write_bytes(bytes(data))
    with pytest.raises(StreamFormatError) as excinfo:
        read_archive(path)
    assert excinfo.value.details["offset"] == 4


def test_truncated_and_trailing(tmp_path):
    path = tmp_path / "w.alrt"
    write_archive({"a": np.ones((2, 2))}, path)
    data = path.read_bytes()
    # header 12, name length 2, name 1, ndim 1, dims 8, payload 16
    assert len(data) == 40

    path.write_bytes(data[:-2])
    with pytest.raises(StreamFormatError) as excinfo:
        read_archive(path)
    assert excinfo.value.details["offset"] == 24

    path.write_bytes(data + b"\x00")
    with pytest.raises(StreamFormatError) as excinfo:
        read_archive(path)
    assert excinfo.value.details["offset"] == 40


def test_require_checks():
    archive = WeightArchive({"w": np.ones((2, 3)), "bad": np.array([1.0, np.nan])})
    assert archive.require("w", (2, 3)).shape == (2, 3)

    for name, shape in (("missing", (1,)), ("w", (3, 2)), ("bad", (2,))):
        with pytest.raises(ConfigError) as excinfo:
            archive.require(name, shape)
        assert excinfo.value.details["tensor"] == name


def test_error_line():
    error = EventBoundsError("Event 3 outside 32x32 sensor", {"index": 3})
    assert error.to_line() == 'error=ValidationError message="Event 3 outside 32x32 sensor" index=3'
    assert StreamFormatError("bad").to_line() == 'error=FormatError message="bad"'
