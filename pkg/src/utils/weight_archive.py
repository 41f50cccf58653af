"""
Weight Archive
Named float32 tensor store ("ALRT" container) for MLP, positional, head and state dumps
"""

import struct
from pathlib import Path
from typing import Dict, Iterator, Mapping, Union

import numpy as np
from loguru import logger

from src.utils.errors import ConfigError, StreamFormatError


ARCHIVE_MAGIC = b"ALRT"
ARCHIVE_VERSION = 1

_HEADER = struct.Struct("<4sII")
_NAME_LEN = struct.Struct("<H")
_NDIM = struct.Struct("<B")


class WeightArchive(Mapping[str, np.ndarray]):
    """Ordered, read-only mapping of tensor name to float32 array"""

    def __init__(self, tensors: Mapping[str, np.ndarray]):
        self._tensors: Dict[str, np.ndarray] = {}
        for name, value in tensors.items():
            array = np.asarray(value, dtype=np.float32).copy(order="C")
            array.setflags(write=False)
            self._tensors[name] = array

    def __getitem__(self, name: str) -> np.ndarray:
        return self._tensors[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._tensors)

    def __len__(self) -> int:
        return len(self._tensors)

    def require(self, name: str, shape: tuple) -> np.ndarray:
        """
        Fetch a tensor and check its shape

        Args:
            name: Canonical tensor name (e.g. "fg.layer0.weight")
            shape: Expected shape

        Returns:
            The stored array

        Raises:
            ConfigError: If the tensor is missing, mis-shaped or non-finite
        """
        if name not in self._tensors:
            raise ConfigError(f"Missing tensor '{name}' in weight archive", {"tensor": name})

        array = self._tensors[name]
        if array.shape != tuple(shape):
            raise ConfigError(
                f"Tensor '{name}' has shape {array.shape}, expected {tuple(shape)}",
                {"tensor": name}
            )
        if not np.all(np.isfinite(array)):
            raise ConfigError(f"Tensor '{name}' contains non-finite values", {"tensor": name})
        return array


def write_archive(tensors: Mapping[str, np.ndarray], path: Union[str, Path]) -> None:
    """
    Write tensors to an ALRT archive

    Args:
        tensors: Name to array mapping (cast to float32, row-major)
        path: Output file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    chunks = [_HEADER.pack(ARCHIVE_MAGIC, ARCHIVE_VERSION, len(tensors))]
    for name, value in tensors.items():
        array = np.asarray(value, dtype="<f4").copy(order="C")
        encoded = name.encode("utf-8")
        chunks.append(_NAME_LEN.pack(len(encoded)))
        chunks.append(encoded)
        chunks.append(_NDIM.pack(array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}I", *array.shape))
        chunks.append(array.tobytes(order="C"))

    path.write_bytes(b"".join(chunks))
    logger.debug(f"Wrote {len(tensors)} tensors to {path}")


def read_archive(path: Union[str, Path]) -> WeightArchive:
    """
    Read an ALRT archive

    Args:
        path: Archive file

    Returns:
        WeightArchive in file order

    Raises:
        ConfigError: If the file does not exist
        StreamFormatError: On bad magic, version or truncated sections
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Weight archive not found: {path}", {"path": str(path)})

    buffer = path.read_bytes()
    if len(buffer) < _HEADER.size:
        raise StreamFormatError("Truncated archive header", {"offset": 0})

    magic, version, count = _HEADER.unpack_from(buffer, 0)
    if magic != ARCHIVE_MAGIC:
        raise StreamFormatError(f"Bad archive magic {magic!r}", {"offset": 0})
    if version != ARCHIVE_VERSION:
        raise StreamFormatError(f"Unsupported archive version {version}", {"offset": 4})

    offset = _HEADER.size
    tensors: Dict[str, np.ndarray] = {}

    try:
        for _ in range(count):
            (name_len,) = _NAME_LEN.unpack_from(buffer, offset)
            offset += _NAME_LEN.size
            name = buffer[offset:offset + name_len].decode("utf-8")
            if len(name.encode("utf-8")) != name_len:
                raise struct.error("name truncated")
            offset += name_len

            (ndim,) = _NDIM.unpack_from(buffer, offset)
            offset += _NDIM.size
            dims = struct.unpack_from(f"<{ndim}I", buffer, offset)
            offset += 4 * ndim

            size = int(np.prod(dims, dtype=np.int64)) if ndim else 1
            nbytes = 4 * size
            if offset + nbytes > len(buffer):
                raise struct.error("payload truncated")
            array = np.frombuffer(buffer, dtype="<f4", count=size, offset=offset)
            tensors[name] = array.reshape(dims).astype(np.float32)
            offset += nbytes
    except (struct.error, UnicodeDecodeError) as e:
        raise StreamFormatError(f"Malformed archive section: {e}", {"offset": offset})

    if offset != len(buffer):
        raise StreamFormatError("Trailing bytes after last tensor", {"offset": offset})

    logger.debug(f"Loaded {len(tensors)} tensors from {path}")
    return WeightArchive(tensors)
