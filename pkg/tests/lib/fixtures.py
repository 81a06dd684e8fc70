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


from __future__ import annotations

import dataclasses
import functools
from typing import Dict, Optional, Tuple

import numpy as np

from tests.lib.logger import logger


@dataclasses.dataclass(frozen=True)
class BlobFixture:
    """A gaussian blob dataset with its means on a circle."""

    name: str
    n_classes: int
    per_class: int
    radius: float = 4.0
    sigma: float = 1.0
    dim: int = 2
    seed: int = 0

    @property
    def spec(self):
        from labeldiffusion.datastore.blobs import BlobSpec

        return BlobSpec.on_circle(
            n_classes=self.n_classes,
            per_class=self.per_class,
            radius=self.radius,
            sigma=self.sigma,
            dim=self.dim,
            seed=self.seed,
        )

    def data(self) -> Tuple[np.ndarray, np.ndarray]:
        return _synth(self)


@functools.lru_cache(maxsize=None)
def _synth(fixture: BlobFixture) -> Tuple[np.ndarray, np.ndarray]:
    from labeldiffusion.datastore.blobs import synth_blobs

    logger.info('Generating blobs "%s"', fixture.name)
    features, labels = synth_blobs(fixture.spec)
    features.setflags(write=False)
    labels.setflags(write=False)
    return features, labels


class _Fixtures:
    """Named datasets that tests share."""

    def __init__(self):
        self._fixtures: Dict[str, BlobFixture] = {
            fixture.name: fixture
            for fixture in [
                BlobFixture("small", n_classes=3, per_class=20, sigma=0.5, seed=1),
                BlobFixture("four", n_classes=4, per_class=100, seed=2),
                # practically no overlap, neighbors share the class
                BlobFixture("tight", n_classes=4, per_class=250, sigma=1e-3, seed=3),
                # 40000 points for posterior and noise rate statistics
                BlobFixture("large", n_classes=4, per_class=10000, seed=4),
                BlobFixture("acceptance_train", n_classes=4, per_class=500, seed=5),
                BlobFixture("acceptance_test", n_classes=4, per_class=500, seed=6),
            ]
        }

    def __getitem__(self, name: str) -> BlobFixture:
        return self._fixtures[name]

    def __iter__(self):
        return iter(self._fixtures.values())

    def get(self, name: str) -> Optional[BlobFixture]:
        return self._fixtures.get(name)

    @property
    def small(self) -> BlobFixture:
        return self["small"]

    @property
    def four(self) -> BlobFixture:
        return self["four"]

    @property
    def tight(self) -> BlobFixture:
        return self["tight"]

    @property
    def large(self) -> BlobFixture:
        return self["large"]

    @property
    def acceptance_train(self) -> BlobFixture:
        return self["acceptance_train"]

    @property
    def acceptance_test(self) -> BlobFixture:
        return self["acceptance_test"]


fixtures = _Fixtures()


class OracleEpsilon:
    """Knows y_0 and f_q(x) of every row and returns the exact noise of y_t."""

    def __init__(self, schedule, y0: np.ndarray, f_q: Optional[np.ndarray] = None):
        self.schedule = schedule
        self.y0 = np.atleast_2d(np.asarray(y0, dtype=np.float64))
        self.f_q = np.zeros_like(self.y0) if f_q is None else np.atleast_2d(f_q)
        self.calls = 0

    def predict(self, y_t, f_p_x, x_raw, t) -> np.ndarray:
        self.calls += 1
        y_t = np.atleast_2d(y_t)
        rows = y_t.shape[0]
        alpha_bar = np.atleast_1d(self.schedule.alpha_bar_at(t))[:, np.newaxis]
        signal = np.sqrt(alpha_bar)
        return (y_t - signal * self.y0[:rows] - (1 - signal) * self.f_q[:rows]) / np.sqrt(
            1 - alpha_bar
        )


class ZeroEpsilon:
    """Predicts no noise at all."""

    def __init__(self, n_classes: int):
        self.n_classes = n_classes

    def predict(self, y_t, f_p_x, x_raw, t) -> np.ndarray:
        return np.zeros_like(np.atleast_2d(y_t), dtype=np.float64)


def random_one_hot(rng: np.random.Generator, batch_size: int, n_classes: int) -> np.ndarray:
    result = np.zeros((batch_size, n_classes))
    result[np.arange(batch_size), rng.integers(n_classes, size=batch_size)] = 1.0
    return result


def small_diffusion(T: int = 10, S: Optional[int] = None, n_classes: int = 3, provided=False):
    """A diffusion setup with a short linear schedule."""
    from labeldiffusion.configs.diffusion_config import DiffusionConfig
    from labeldiffusion.configs.training import FqMode
    from labeldiffusion.diffusion.schedule import linear_beta_schedule

    return DiffusionConfig(
        schedule=linear_beta_schedule(T, 0.05, 0.3) if T > 1 else linear_beta_schedule(1, 0.5, 0.5),
        S=T if S is None else S,
        f_q_mode=FqMode.PROVIDED if provided else FqMode.ZERO,
        n_classes=n_classes,
    )
