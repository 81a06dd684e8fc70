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
import unittest

from labeldiffusion.datastore.blobs import BlobSpec
from labeldiffusion.datastore.manifest import (
    read_key_values,
    read_manifest,
    write_key_values,
    write_manifest,
    write_provenance,
)
from labeldiffusion.exceptions import CorruptFileError


class TestKeyValues(unittest.TestCase):
    def setUp(self):
        self.path = os.path.join(tmp, "meta", "entries.txt")

    def tearDown(self):
        quick_cleanup()

    def test_round_trip(self):
        write_key_values(self.path, {"kind": "uniform", "tau": 0.3, "seed": 4})
        self.assertEqual(
            read_key_values(self.path), {"kind": "uniform", "tau": "0.3", "seed": "4"}
        )

    def test_comments_and_blank_lines(self):
        os.makedirs(os.path.dirname(self.path), exist_ok=True)
        with open(self.path, "w") as file:
            file.write("# generated\n\na = 1\nb=x=y\n")
        self.assertEqual(read_key_values(self.path), {"a": "1", "b": "x=y"})

    def test_invalid_lines(self):
        os.makedirs(os.path.dirname(self.path), exist_ok=True)
        with open(self.path, "w") as file:
            file.write("a=1\nnonsense\n")
        self.assertRaises(CorruptFileError, read_key_values, self.path)

    def test_multiline_values(self):
        self.assertRaises(ValueError, write_key_values, self.path, {"a": "1\n2"})
        self.assertRaises(ValueError, write_key_values, self.path, {"a=b": "1"})


class TestManifest(unittest.TestCase):
    def setUp(self):
        self.features_path = os.path.join(tmp, "blobs.lraf")

    def tearDown(self):
        quick_cleanup()

    def test_round_trip(self):
        spec = BlobSpec.on_circle(5, 12, radius=3.3, sigma=0.7, dim=3, seed=-4)
        write_manifest(self.features_path, spec, labels="blobs.lral")
        path = self.features_path + ".manifest"
        self.assertTrue(os.path.exists(path))
        self.assertEqual(read_manifest(path), spec)
        self.assertEqual(read_key_values(path)["labels"], "blobs.lral")

    def test_rejects(self):
        path = os.path.join(tmp, "broken.manifest")
        write_key_values(path, {"generator": "images"})
        self.assertRaises(CorruptFileError, read_manifest, path)

        write_key_values(path, {"generator": "blobs", "n_classes": 2})
        self.assertRaises(CorruptFileError, read_manifest, path)

        write_key_values(
            path,
            {
                "generator": "blobs",
                "n_classes": 2,
                "per_class": 1,
                "sigma": "1.0",
                "seed": 0,
                "means": "0,0;0,0",
            },
        )
        self.assertRaises(CorruptFileError, read_manifest, path)

    def test_provenance(self):
        labels_path = os.path.join(tmp, "noisy.lral")
        write_provenance(labels_path, kind="pmd", target_rate=0.35, seed=2)
        entries = read_key_values(labels_path + ".provenance")
        self.assertEqual(entries, {"kind": "pmd", "target_rate": "0.35", "seed": "2"})


if __name__ == "__main__":
    unittest.main()
