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


from tests.lib.cleanup import quick_cleanup
from tests.lib.tmp import tmp

import os
import struct
import unittest

import numpy as np

from labeldiffusion.datastore.formats import (
    read_candidates,
    read_features,
    read_labels,
    write_candidates,
    write_features,
    write_labels,
)
from labeldiffusion.exceptions import (
    CorruptFileError,
    DimensionError,
    EmptyDatasetError,
    LabelRangeError,
)


def truncate(path, size):
    with open(path, "r+b") as file:
        file.truncate(size)


class TestFeatures(unittest.TestCase):
    def setUp(self):
        self.path = os.path.join(tmp, "data", "features.lraf")

    def tearDown(self):
        quick_cleanup()

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        for shape in ((1, 1), (10, 100), (1000, 1000)):
            features = rng.normal(size=shape).astype(np.float32)
            write_features(self.path, features)
            loaded = read_features(self.path, dtype=np.float32)
            self.assertEqual(loaded.shape, shape)
            self.assertEqual(loaded.tobytes(), features.tobytes())

    def test_widened_to_float64(self):
        features = np.array([[0.1, 2.5], [-1.0, 3.0]])
        write_features(self.path, features)
        loaded = read_features(self.path)
        self.assertEqual(loaded.dtype, np.float64)
        np.testing.assert_array_equal(loaded, features.astype(np.float32).astype(np.float64))

    def test_layout(self):
        write_features(self.path, np.array([[1.0, 2.0, 3.0]]))
        with open(self.path, "rb") as file:
            data = file.read()
        self.assertEqual(data[:4], b"LRAF")
        self.assertEqual(struct.unpack("<IQI", data[4:20]), (1, 1, 3))
        self.assertEqual(struct.unpack("<3f", data[20:]), (1.0, 2.0, 3.0))

    def test_truncated(self):
        write_features(self.path, np.ones((5, 3)))
        size = os.path.getsize(self.path)
        for length in (size - 1, 19, 3, 0):
            truncate(self.path, length)
            self.assertRaises(CorruptFileError, read_features, self.path)

    def test_trailing_bytes(self):
        write_features(self.path, np.ones((5, 3)))
        with open(self.path, "ab") as file:
            file.write(b"\x00")
        self.assertRaises(CorruptFileError, read_features, self.path)

    def test_wrong_magic_and_version(self):
        write_labels(self.path, [0, 1], 2)
        self.assertRaises(CorruptFileError, read_features, self.path)

        write_features(self.path, np.ones((1, 1)))
        with open(self.path, "r+b") as file:
            file.seek(4)
            file.write(struct.pack("<I", 2))
        self.assertRaises(CorruptFileError, read_features, self.path)

    def test_rejects(self):
        self.assertRaises(EmptyDatasetError, write_features, self.path, np.zeros((0, 3)))
        self.assertRaises(EmptyDatasetError, write_features, self.path, np.zeros((3, 0)))
        self.assertRaises(DimensionError, write_features, self.path, np.zeros(3))
        self.assertRaises(FileNotFoundError, read_features, os.path.join(tmp, "missing"))


class TestLabels(unittest.TestCase):
    def setUp(self):
        self.path = os.path.join(tmp, "data", "labels.lral")

    def tearDown(self):
        quick_cleanup()

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        for n in (1, 1000, 10**6):
            labels = rng.integers(0, 10, size=n)
            write_labels(self.path, labels, 10)
            loaded, n_classes = read_labels(self.path)
            self.assertEqual(n_classes, 10)
            self.assertEqual(loaded.dtype, np.int64)
            np.testing.assert_array_equal(loaded, labels)

    def test_layout(self):
        write_labels(self.path, [2, 0], 3)
        with open(self.path, "rb") as file:
            data = file.read()
        self.assertEqual(data[:4], b"LRAL")
        self.assertEqual(struct.unpack("<IQI2I", data[4:]), (1, 2, 3, 2, 0))

    def test_out_of_range_on_write(self):
        self.assertRaises(LabelRangeError, write_labels, self.path, [0, 3], 3)
        self.assertRaises(LabelRangeError, write_labels, self.path, [0, -1], 3)
        self.assertRaises(LabelRangeError, write_labels, self.path, [0], 0)

    def test_out_of_range_on_read(self):
        os.makedirs(os.path.dirname(self.path), exist_ok=True)
        with open(self.path, "wb") as file:
            file.write(b"LRAL" + struct.pack("<IQI", 1, 2, 3) + struct.pack("<2I", 1, 5))
        self.assertRaises(LabelRangeError, read_labels, self.path)

    def test_truncated(self):
        write_labels(self.path, [0, 1, 2], 3)
        truncate(self.path, os.path.getsize(self.path) - 2)
        self.assertRaises(CorruptFileError, read_labels, self.path)

    def test_rejects(self):
        self.assertRaises(EmptyDatasetError, write_labels, self.path, [], 3)
        self.assertRaises(DimensionError, write_labels, self.path, [[0, 1]], 3)


class TestCandidates(unittest.TestCase):
    def setUp(self):
        self.path = os.path.join(tmp, "data", "candidates.lrac")

    def tearDown(self):
        quick_cleanup()

    def test_round_trip(self):
        table = np.array([[0, 1, 1], [2, 2, 0]])
        write_candidates(self.path, table)
        np.testing.assert_array_equal(read_candidates(self.path), table)

    def test_anchor_only(self):
        write_candidates(self.path, [[3], [1]])
        self.assertEqual(read_candidates(self.path).shape, (2, 1))

    def test_rejects(self):
        self.assertRaises(EmptyDatasetError, write_candidates, self.path, np.zeros((0, 3)))
        self.assertRaises(DimensionError, write_candidates, self.path, [1, 2])
        write_labels(self.path, [0], 1)
        self.assertRaises(CorruptFileError, read_candidates, self.path)


if __name__ == "__main__":
    unittest.main()
