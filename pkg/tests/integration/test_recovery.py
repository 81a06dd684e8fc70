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


"""Recover clean decisions from 40% uniform label noise on four gaussian blobs."""

from tests.lib.cleanup import quick_cleanup
from tests.lib.fixtures import fixtures
from tests.lib.logger import logger

import os
import time
import unittest

import numpy as np

from labeldiffusion.configs.training import TargetMode, TrainConfig
from labeldiffusion.diffusion.sampler import mle_infer
from labeldiffusion.diffusion.trainer import train
from labeldiffusion.evalharness import accuracy, knn_classifier, noise_rate
from labeldiffusion.noisegen import compose_noise, uniform_matrix
from labeldiffusion.retrieval import build_index, mean_targets
from labeldiffusion.utils import make_rng

NOISE = 0.4


def recovery_config(**kwargs) -> TrainConfig:
    settings = dict(T=1000, S=10, k=10, epochs=200, seed=7)
    settings.update(kwargs)
    return TrainConfig(**settings)


@unittest.skipIf(os.environ.get("LABEL_DIFFUSION_QUICK_TESTS"), "trains for minutes")
class TestRecovery(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.features, cls.clean = fixtures.acceptance_train.data()
        cls.test_features, cls.test_labels = fixtures.acceptance_test.data()
        _, cls.noisy = compose_noise(cls.clean, make_rng(11), None, [uniform_matrix(4, NOISE)])

        started = time.perf_counter()
        cls.result = train(recovery_config(), cls.features, cls.noisy, 4, clean_labels=cls.clean)
        logger.info("trained in %.1fs", time.perf_counter() - started)
        cls.prediction, _ = mle_infer(cls.result.diffusion, cls.result.model, cls.test_features)

    def tearDown(self):
        quick_cleanup()

    def test_realized_noise(self):
        self.assertAlmostEqual(noise_rate(self.noisy, self.clean), NOISE, delta=0.04)

    def test_retrieval_purifies_targets(self):
        # every entry is clean about as often as the labels themselves
        self.assertAlmostEqual(self.result.candidate_clean, 1 - NOISE, delta=0.04)
        # but the majority of a candidate set is clean far more often
        majority = np.argmax(mean_targets(self.result.candidates, 4), axis=1)
        self.assertGreater(accuracy(majority, self.clean), 1 - NOISE + 0.05)

    def test_accuracy(self):
        score = accuracy(self.prediction, self.test_labels)
        index = build_index(self.features, self.noisy)
        baseline = accuracy(knn_classifier(index, self.test_features, 10, 4), self.test_labels)
        logger.info("accuracy=%.4f knn=%.4f", score, baseline)

        self.assertGreaterEqual(score, 0.85)
        self.assertGreaterEqual(score, baseline - 0.01)

    def test_same_seed_same_model(self):
        again = train(recovery_config(), self.features, self.noisy, 4, clean_labels=self.clean)
        self.assertEqual(again.final_loss, self.result.final_loss)
        prediction, _ = mle_infer(again.diffusion, again.model, self.test_features)
        np.testing.assert_array_equal(prediction, self.prediction)

    def test_mean_targets(self):
        result = train(
            recovery_config(target_mode=TargetMode.MEAN),
            self.features,
            self.noisy,
            4,
        )
        # a zeroed model scores E||eps||^2 = n_classes
        self.assertLess(result.final_loss, 4)
        prediction, scores = mle_infer(result.diffusion, result.model, self.test_features)
        mean_accuracy = accuracy(prediction, self.test_labels)
        sample_accuracy = accuracy(self.prediction, self.test_labels)
        self.assertGreaterEqual(mean_accuracy, 0.85)
        self.assertLessEqual(abs(mean_accuracy - sample_accuracy), 0.03)
        self.assertTrue(np.all(np.isfinite(scores)))

    def test_inference_speed(self):
        features, _ = fixtures.large.data()
        queries = features[:10000]

        started = time.perf_counter()
        first, scores = mle_infer(self.result.diffusion, self.result.model, queries)
        elapsed = time.perf_counter() - started
        second, scores_again = mle_infer(
            self.result.diffusion, self.result.model, queries, threads=4
        )

        self.assertLess(elapsed, 60)
        np.testing.assert_array_equal(first, second)
        np.testing.assert_array_equal(scores, scores_again)


if __name__ == "__main__":
    unittest.main()
