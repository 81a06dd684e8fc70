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


"""Gaussian blobs with equal priors, a dataset whose Bayes posterior is known."""

import math
from typing import List, Tuple

import numpy as np
from scipy.special import softmax

try:
    from pydantic.v1 import BaseModel, PositiveInt, confloat, root_validator
except ImportError:
    from pydantic import BaseModel, PositiveInt, confloat, root_validator

from labeldiffusion.configs.validation_errors import BlobMeansError
from labeldiffusion.exceptions import ZeroVarianceError
from labeldiffusion.utils import as_batch, make_rng


class BlobSpec(BaseModel):
    """per_class points of every class, drawn from N(means[c], sigma^2 I)."""

    n_classes: PositiveInt
    per_class: PositiveInt
    means: List[List[float]]
    sigma: confloat(ge=0)  # type: ignore
    seed: int = 0

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def validate_means(cls, values):
        means = values["means"]
        if len(means) != values["n_classes"]:
            raise BlobMeansError(
                f"Expected {values['n_classes']} means, got {len(means)}"
            )

        dims = {len(mean) for mean in means}
        if len(dims) != 1 or 0 in dims:
            raise BlobMeansError(f"All means need the same positive dimension, got {dims}")

        as_tuples = [tuple(mean) for mean in means]
        if len(set(as_tuples)) != len(as_tuples):
            raise BlobMeansError("The means of two classes are identical")

        return values

    @classmethod
    def on_circle(
        cls,
        n_classes: int,
        per_class: int,
        radius: float = 4.0,
        sigma: float = 1.0,
        dim: int = 2,
        seed: int = 0,
    ) -> "BlobSpec":
        """Means evenly spaced on a circle in the first two coordinates."""
        if dim < 2:
            raise BlobMeansError(f"Means on a circle need at least 2 dimensions, got {dim}")

        means = []
        for c in range(n_classes):
            angle = 2 * math.pi * c / n_classes
            mean = [0.0] * dim
            mean[0] = radius * math.cos(angle)
            mean[1] = radius * math.sin(angle)
            means.append(mean)

        return cls(
            n_classes=n_classes,
            per_class=per_class,
            means=means,
            sigma=sigma,
            seed=seed,
        )

    @property
    def dim(self) -> int:
        return len(self.means[0])

    @property
    def mean_matrix(self) -> np.ndarray:
        return np.array(self.means, dtype=np.float64)

    @property
    def size(self) -> int:
        return self.n_classes * self.per_class


def synth_blobs(spec: BlobSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Features and clean labels, grouped by class."""
    rng = make_rng(spec.seed)
    labels = np.repeat(np.arange(spec.n_classes, dtype=np.int64), spec.per_class)
    noise = rng.standard_normal((labels.shape[0], spec.dim))
    features = spec.mean_matrix[labels] + spec.sigma * noise
    return features, labels


def blob_posterior(spec: BlobSpec, x) -> np.ndarray:
    """Exact p(class | x) under equal priors, one row per point in x."""
    if spec.sigma == 0:
        raise ZeroVarianceError()

    points = as_batch(x, spec.dim, "x")
    means = spec.mean_matrix
    squared = ((points[:, np.newaxis, :] - means[np.newaxis, :, :]) ** 2).sum(axis=2)
    return softmax(-squared / (2 * spec.sigma**2), axis=1)


def bayes_classify(spec: BlobSpec, x) -> np.ndarray:
    """The most likely class, the lowest index wins ties."""
    return np.argmax(blob_posterior(spec, x), axis=1)
