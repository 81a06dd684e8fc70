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

import contextlib
import io
import os
import unittest

import numpy as np

from labeldiffusion.cli import main, make_parser
from labeldiffusion.datastore.formats import read_features, read_labels
from labeldiffusion.datastore.manifest import read_key_values, read_manifest
from labeldiffusion.diffusion.checkpoint import load_checkpoint


def run(*argv):
    """Exit status and stdout of the command line."""
    stdout = io.StringIO()
    with contextlib.redirect_stdout(stdout):
        status = main([str(arg) for arg in argv])
    return status, stdout.getvalue()


def result_line(stdout: str) -> dict:
    """The key=value pairs of the last printed line."""
    line = stdout.strip().splitlines()[-1]
    return dict(pair.split("=", 1) for pair in line.split())


class TestCli(unittest.TestCase):
    def setUp(self):
        self.features = os.path.join(tmp, "cli", "features.lraf")
        self.labels = os.path.join(tmp, "cli", "labels.lral")

    def tearDown(self):
        quick_cleanup()

    def path(self, name):
        return os.path.join(tmp, "cli", name)

    def synth(self, *extra):
        status, stdout = run(
            "--seed", 3,
            "synth",
            "--classes", 3,
            "--per-class", 30,
            "--features-out", self.features,
            "--labels-out", self.labels,
            *extra,
        )
        self.assertEqual(status, 0)
        return stdout

    def test_synth(self):
        stdout = self.synth()
        self.assertEqual(result_line(stdout), {"points": "90", "classes": "3", "dim": "2"})
        self.assertEqual(read_features(self.features).shape, (90, 2))
        labels, n_classes = read_labels(self.labels)
        self.assertEqual(n_classes, 3)
        np.testing.assert_array_equal(np.bincount(labels), [30, 30, 30])
        spec = read_manifest(self.features + ".manifest")
        self.assertEqual(spec.seed, 3)

    def test_noisify_without_noise_is_identical(self):
        self.synth()
        out = self.path("same.lral")
        status, stdout = run("noisify", "--labels", self.labels, "--out", out, "--noise", "uniform=0")
        self.assertEqual(status, 0)
        self.assertEqual(result_line(stdout)["noise_rate"], "0")
        with open(self.labels, "rb") as a, open(out, "rb") as b:
            self.assertEqual(a.read(), b.read())

    def test_noisify_uniform(self):
        self.synth()
        out = self.path("noisy.lral")
        status, stdout = run(
            "--seed", 1, "noisify", "--labels", self.labels, "--out", out, "--noise", "uniform=0.4"
        )
        self.assertEqual(status, 0)
        clean, _ = read_labels(self.labels)
        noisy, _ = read_labels(out)
        self.assertAlmostEqual(
            float(result_line(stdout)["noise_rate"]), np.mean(clean != noisy), places=5
        )
        provenance = read_key_values(out + ".provenance")
        self.assertEqual(provenance["seed"], "1")
        self.assertEqual(provenance["step0"], "uniform=0.4")

    def test_noisify_pmd(self):
        self.synth("--sigma", 2)
        out = self.path("pmd.lral")
        reference = self.path("reference.lral")
        status, stdout = run(
            "noisify",
            "--labels", self.labels,
            "--out", out,
            "--features", self.features,
            "--noise", "pmd=0.3",
            "--noise", "asymmetric=0.1",
            "--reference-out", reference,
        )
        self.assertEqual(status, 0)
        provenance = read_key_values(out + ".provenance")
        self.assertEqual(provenance["pmd"], "0.3")
        self.assertGreater(float(provenance["pmd_noise_factor"]), 0)
        self.assertTrue(os.path.exists(reference))
        rate = float(result_line(stdout)["noise_rate"])
        self.assertGreater(rate, 0)
        self.assertLess(rate, 1)

    def test_pmd_needs_a_posterior(self):
        self.synth()
        status, _ = run(
            "noisify", "--labels", self.labels, "--out", self.path("x.lral"), "--noise", "pmd=0.3"
        )
        self.assertEqual(status, 1)
        self.assertFalse(os.path.exists(self.path("x.lral")))

    def test_refuses_to_overwrite_inputs(self):
        self.synth()
        with open(self.labels, "rb") as file:
            before = file.read()
        status, _ = run(
            "noisify", "--labels", self.labels, "--out", self.labels, "--noise", "uniform=0.5"
        )
        self.assertEqual(status, 1)
        with open(self.labels, "rb") as file:
            self.assertEqual(file.read(), before)

    def test_metrics_out_refuses_to_overwrite_inputs(self):
        self.synth()
        with open(self.labels, "rb") as file:
            before = file.read()

        status, _ = run(
            "eval", "--pred", self.labels, "--truth", self.labels, "--metrics-out", self.labels
        )
        self.assertEqual(status, 1)

        status, _ = run(
            "train",
            "--features", self.features,
            "--labels", self.labels,
            "--checkpoint-out", self.path("model.ckpt"),
            "--metrics-out", self.labels,
            "--T", 20,
            "--S", 4,
            "--k", 3,
            "--epochs", 1,
        )
        self.assertEqual(status, 1)
        self.assertFalse(os.path.exists(self.path("model.ckpt")))

        with open(self.labels, "rb") as file:
            self.assertEqual(file.read(), before)

    def test_invalid_values(self):
        self.synth()
        status, _ = run(
            "noisify", "--labels", self.labels, "--out", self.path("y.lral"), "--noise", "uniform=1.5"
        )
        self.assertEqual(status, 1)

        status, _ = run("eval", "--pred", self.path("missing.lral"), "--truth", self.labels)
        self.assertEqual(status, 1)

    def test_usage_errors(self):
        with contextlib.redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as context:
                make_parser().parse_args(["noisify", "--labels", "a", "--out", "b", "--noise", "gaussian=0.1"])
            self.assertEqual(context.exception.code, 2)

            with self.assertRaises(SystemExit):
                make_parser().parse_args([])

    def test_eval(self):
        self.synth()
        metrics = self.path("metrics.csv")
        status, stdout = run("eval", "--pred", self.labels, "--truth", self.labels, "--metrics-out", metrics)
        self.assertEqual(status, 0)
        self.assertEqual(result_line(stdout), {"accuracy": "1", "noise_rate": "0"})
        self.assertTrue(os.path.exists(metrics))

    def test_knn(self):
        self.synth()
        out = self.path("knn.lral")
        status, stdout = run(
            "knn",
            "--features", self.features,
            "--labels", self.labels,
            "--queries", self.features,
            "--truth", self.labels,
            "--out", out,
            "--select-k", "1,3,500",
        )
        self.assertEqual(status, 0)
        # every query is also indexed, so k=1 finds itself
        self.assertEqual(result_line(stdout), {"k": "1", "accuracy": "1"})
        np.testing.assert_array_equal(read_labels(out)[0], read_labels(self.labels)[0])

    def test_select_k_needs_truth(self):
        self.synth()
        status, _ = run(
            "knn",
            "--features", self.features,
            "--labels", self.labels,
            "--queries", self.features,
            "--select-k", "1,3",
        )
        self.assertEqual(status, 1)

    def test_train_and_infer(self):
        self.synth()
        checkpoint = self.path("model.ckpt")
        status, stdout = run(
            "train",
            "--features", self.features,
            "--labels", self.labels,
            "--clean-labels", self.labels,
            "--checkpoint-out", checkpoint,
            "--T", 20,
            "--S", 4,
            "--k", 3,
            "--hidden", 8,
            "--time-embed-dim", 4,
            "--blocks", 1,
            "--epochs", 2,
            "--batch-size", 32,
            "--candidates", self.path("candidates.lrac"),
        )
        self.assertEqual(status, 0)
        metrics = result_line(stdout)
        self.assertEqual(metrics["epochs"], "2")
        self.assertGreater(float(metrics["candidate_clean_fraction"]), 0.9)
        self.assertTrue(os.path.exists(self.path("candidates.lrac")))

        loaded = load_checkpoint(checkpoint)
        self.assertEqual(loaded.diffusion.S, 4)
        self.assertEqual(loaded.model.architecture.num_timesteps, 20)

        predictions = self.path("pred.lral")
        scores = self.path("scores.lraf")
        status, stdout = run(
            "infer",
            "--checkpoint", checkpoint,
            "--features", self.features,
            "--out", predictions,
            "--scores-out", scores,
        )
        self.assertEqual(status, 0)
        self.assertEqual(result_line(stdout), {"points": "90", "mode": "mle", "steps": "4"})
        self.assertEqual(read_labels(predictions)[0].shape, (90,))
        self.assertEqual(read_features(scores).shape, (90, 3))

        votes = self.path("votes.lral")
        status, stdout = run(
            "--threads", 2,
            "infer",
            "--checkpoint", checkpoint,
            "--features", self.features,
            "--out", votes,
            "--mode", "vote",
            "--samples", 3,
            "--steps", 2,
        )
        self.assertEqual(status, 0)
        self.assertEqual(result_line(stdout)["steps"], "2")

        status, _ = run(
            "infer",
            "--checkpoint", checkpoint,
            "--features", self.features,
            "--out", self.path("z.lral"),
            "--steps", 21,
        )
        self.assertEqual(status, 1)


if __name__ == "__main__":
    unittest.main()
