# -*- coding: utf-8 -*-
# label-diffusion - classifiers from noisy labels via conditional label diffusion
# Copyright (C) 2026 label-diffusion contributors
#
# This file is part of label-diffusion.
#
# label-diffusion is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# label-diffusion is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with label-diffusion.  If not, see <https://www.gnu.org/licenses/>.


"""Binary files for features, labels and cached candidate tables.

Every file starts with a 4 byte magic and a u32 version, everything is
little-endian and the payload has to match the header exactly.

    LRAF: u64 n, u32 d, n * d f32 row-major
    LRAL: u64 n, u32 n_classes, n u32 class ids
    LRAC: u64 n, u32 k, n * (k + 1) u32 class ids
"""

import struct
from typing import Callable, Tuple

import numpy as np

from labeldiffusion.exceptions import (
    CorruptFileError,
    DimensionError,
    EmptyDatasetError,
    LabelRangeError,
)
from labeldiffusion.logger import logger
from labeldiffusion.paths import PathLike, prepare_output
from labeldiffusion.utils import check_labels

FEATURES_MAGIC = b"LRAF"
LABELS_MAGIC = b"LRAL"
CANDIDATES_MAGIC = b"LRAC"
FORMAT_VERSION = 1

# magic, version, n, second dimension
_HEADER = struct.Struct("<4sIQI")
_UINT32_MAX = 2**32 - 1


def _write(path: PathLike, magic: bytes, n: int, second: int, payload: np.ndarray):
    path = prepare_output(path)
    with open(path, "wb") as file:
        file.write(_HEADER.pack(magic, FORMAT_VERSION, n, second))
        file.write(payload.tobytes())

    logger.debug('Wrote %d rows to "%s"', n, path)


def _read(
    path: PathLike, magic: bytes, row_bytes: Callable[[int], int]
) -> Tuple[int, int, bytes]:
    """Header values and the payload, after checking the file for consistency.

    row_bytes computes the payload size of one row from the second dimension.
    """
    with open(path, "rb") as file:
        data = file.read()

    if len(data) < _HEADER.size:
        raise CorruptFileError(path, f"{len(data)} bytes are too short for a header")

    found, version, n, second = _HEADER.unpack_from(data)
    if found != magic:
        raise CorruptFileError(path, f"Expected magic {magic!r}, found {found!r}")

    if version != FORMAT_VERSION:
        raise CorruptFileError(path, f"Unsupported version {version}")

    payload = data[_HEADER.size :]
    expected = n * row_bytes(second)
    if len(payload) != expected:
        raise CorruptFileError(
            path, f"Expected {expected} payload bytes, found {len(payload)}"
        )

    return n, second, payload


def write_features(path: PathLike, features):
    """Store an (n, d) matrix as 32 bit floats."""
    features = np.asarray(features)
    if features.ndim != 2:
        raise DimensionError("features", "(n, d)", features.shape)

    n, d = features.shape
    if n == 0 or d == 0:
        raise EmptyDatasetError("The feature matrix")

    _write(path, FEATURES_MAGIC, n, d, np.ascontiguousarray(features, dtype="<f4"))


def read_features(path: PathLike, dtype=np.float64) -> np.ndarray:
    """Load a feature file, converted to 64 bit floats by default."""
    n, d, payload = _read(path, FEATURES_MAGIC, lambda d: 4 * d)
    features = np.frombuffer(payload, dtype="<f4").reshape(n, d)
    return features.astype(dtype)


def write_labels(path: PathLike, labels, n_classes: int):
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DimensionError("labels", "(n,)", labels.shape)

    if labels.shape[0] == 0:
        raise EmptyDatasetError("The label vector")

    if not 1 <= n_classes <= _UINT32_MAX:
        raise LabelRangeError(0, n_classes)

    check_labels(labels, n_classes)
    _write(
        path,
        LABELS_MAGIC,
        labels.shape[0],
        n_classes,
        np.ascontiguousarray(labels, dtype="<u4"),
    )


def read_labels(path: PathLike) -> Tuple[np.ndarray, int]:
    """Load a label file. Returns the labels and the number of classes."""
    n, n_classes, payload = _read(path, LABELS_MAGIC, lambda _: 4)
    labels = np.frombuffer(payload, dtype="<u4").astype(np.int64)
    check_labels(labels, n_classes)

    return labels, n_classes


def write_candidates(path: PathLike, table):
    """Cache a candidate table, one row of k+1 labels per point."""
    table = np.asarray(table)
    if table.ndim != 2 or table.shape[1] == 0:
        raise DimensionError("candidate table", "(n, k + 1)", table.shape)

    if table.shape[0] == 0:
        raise EmptyDatasetError("The candidate table")

    n, columns = table.shape
    _write(
        path,
        CANDIDATES_MAGIC,
        n,
        columns - 1,
        np.ascontiguousarray(table, dtype="<u4"),
    )


def read_candidates(path: PathLike) -> np.ndarray:
    n, k, payload = _read(path, CANDIDATES_MAGIC, lambda k: 4 * (k + 1))
    return np.frombuffer(payload, dtype="<u4").astype(np.int64).reshape(n, k + 1)
