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


"""Synthetic label noise: transition matrices and posterior margin noise."""

import enum
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import bisect

try:
    from pydantic.v1 import BaseModel, conint, root_validator, validator
except ImportError:
    from pydantic import BaseModel, conint, root_validator, validator

from labeldiffusion.configs.validation_errors import (
    MappingFixedPointError,
    NoiseLevelError,
)
from labeldiffusion.exceptions import (
    DimensionError,
    NoiseRateUnreachableError,
    SimplexError,
)
from labeldiffusion.logger import logger
from labeldiffusion.utils import check_labels

ROW_SUM_TOLERANCE = 1e-12
POSTERIOR_TOLERANCE = 1e-9
CALIBRATION_XTOL = 1e-12


class TransitionKind(str, enum.Enum):
    UNIFORM = "uniform"
    ASYMMETRIC = "asymmetric"


class _TransitionSpec(BaseModel):
    n_classes: conint(ge=2)  # type: ignore
    tau: float
    mapping: Optional[Tuple[int, ...]] = None

    @validator("tau")
    def tau_in_range(cls, tau: float) -> float:
        if not 0 <= tau < 1:
            raise NoiseLevelError(tau)
        return tau

    @root_validator(skip_on_failure=True)
    def mapping_without_fixed_points(cls, values):
        mapping = values.get("mapping")
        if mapping is None:
            return values

        n_classes = values["n_classes"]
        if len(mapping) != n_classes or any(not 0 <= j < n_classes for j in mapping):
            raise ValueError(
                f"Expected a target class for each of the {n_classes} classes, "
                f"got {list(mapping)}"
            )

        if any(j == i for i, j in enumerate(mapping)):
            raise MappingFixedPointError(mapping)

        return values

    class Config:
        allow_mutation = False


@dataclass(frozen=True)
class TransitionMatrix:
    """P[i, j] is the probability that clean class i is observed as j."""

    P: np.ndarray
    kind: TransitionKind
    tau: float

    @property
    def n_classes(self) -> int:
        return int(self.P.shape[0])


def cyclic_mapping(n_classes: int) -> Tuple[int, ...]:
    """i -> i + 1 modulo n_classes."""
    return tuple((i + 1) % n_classes for i in range(n_classes))


def uniform_matrix(n_classes: int, tau: float) -> TransitionMatrix:
    """Keep the class with 1 - tau, else move to any other class uniformly."""
    spec = _TransitionSpec(n_classes=n_classes, tau=tau)
    P = np.full((spec.n_classes, spec.n_classes), spec.tau / (spec.n_classes - 1))
    np.fill_diagonal(P, 1.0 - spec.tau)
    P.setflags(write=False)
    return TransitionMatrix(P=P, kind=TransitionKind.UNIFORM, tau=spec.tau)


def asymmetric_matrix(
    n_classes: int,
    tau: float,
    mapping: Optional[Sequence[int]] = None,
) -> TransitionMatrix:
    """Keep the class with 1 - tau, else move to mapping[i].

    The mapping defaults to the cyclic one.
    """
    if mapping is None:
        mapping = cyclic_mapping(n_classes)

    spec = _TransitionSpec(n_classes=n_classes, tau=tau, mapping=tuple(mapping))
    P = np.zeros((spec.n_classes, spec.n_classes))
    rows = np.arange(spec.n_classes)
    P[rows, rows] = 1.0 - spec.tau
    P[rows, np.array(spec.mapping)] = spec.tau
    P.setflags(write=False)
    return TransitionMatrix(P=P, kind=TransitionKind.ASYMMETRIC, tau=spec.tau)


def apply_transition(
    labels,
    matrix: TransitionMatrix,
    rng: np.random.Generator,
) -> np.ndarray:
    """Resample every label independently from its row of the matrix."""
    labels = np.asarray(labels, dtype=np.int64)
    check_labels(labels, matrix.n_classes)

    cumulative = np.cumsum(matrix.P, axis=1)
    cumulative[:, -1] = 1.0
    draws = rng.random(labels.shape[0])
    # inverse cdf, the first class whose cumulative probability exceeds the draw
    noisy = np.sum(cumulative[labels] <= draws[:, np.newaxis], axis=1)
    return noisy.astype(np.int64)


@dataclass(frozen=True)
class PosteriorTable:
    """eta(x) of a clean classifier for every point, and the noise factor c."""

    eta: np.ndarray
    noise_factor: float = 0.0

    def __post_init__(self):
        eta = np.asarray(self.eta, dtype=np.float64)
        if eta.ndim != 2 or eta.shape[1] < 2:
            raise DimensionError("eta", "(n, n_classes >= 2)", eta.shape)

        invalid = (eta < 0).any(axis=1) | (
            np.abs(eta.sum(axis=1) - 1.0) > POSTERIOR_TOLERANCE
        )
        if invalid.any():
            raise SimplexError("eta", int(np.argmax(invalid)))

        object.__setattr__(self, "eta", eta)

    def with_noise_factor(self, noise_factor: float) -> "PosteriorTable":
        return PosteriorTable(eta=self.eta, noise_factor=noise_factor)


def top_two(eta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Most and second most likely class per row, the lower index wins ties."""
    first = np.argmax(eta, axis=1)
    masked = eta.copy()
    masked[np.arange(eta.shape[0]), first] = -np.inf
    second = np.argmax(masked, axis=1)
    return first, second


def _flip_weights(eta: np.ndarray) -> np.ndarray:
    """1 - margin^2, the flip probability per unit of c/2."""
    first, second = top_two(eta)
    rows = np.arange(eta.shape[0])
    margin = eta[rows, first] - eta[rows, second]
    return 1.0 - margin * margin


def flip_probabilities(table: PosteriorTable) -> np.ndarray:
    """-(c/2) * margin^2 + c/2 per point, capped at 1."""
    return np.minimum(1.0, table.noise_factor / 2.0 * _flip_weights(table.eta))


def pmd_corrupt(
    table: PosteriorTable,
    rng: np.random.Generator,
) -> Tuple[np.ndarray, np.ndarray]:
    """Label each point as its most likely class, then maybe flip it.

    Returns the initial labels and the noisy labels. Flips only ever go to the
    second most likely class.
    """
    initial, second = top_two(table.eta)
    flips = rng.random(initial.shape[0]) < flip_probabilities(table)
    noisy = np.where(flips, second, initial)
    return initial.astype(np.int64), noisy.astype(np.int64)


def expected_flip_rate(table: PosteriorTable) -> float:
    return float(np.mean(flip_probabilities(table)))


def calibrate_noise_factor(table: PosteriorTable, target_rate: float) -> float:
    """The noise factor c whose expected flip rate is target_rate.

    The rate grows monotonically with c until every flip probability is capped,
    so c is found by bisection.
    """
    weights = _flip_weights(table.eta)
    positive = weights[weights > 0]
    maximum = float(np.mean(weights > 0))

    if target_rate == 0:
        return 0.0

    if not 0 < target_rate < maximum:
        raise NoiseRateUnreachableError(target_rate, maximum)

    def excess(c: float) -> float:
        return float(np.mean(np.minimum(1.0, c / 2.0 * weights))) - target_rate

    # at c_high every point with a positive weight flips for sure
    c_high = 2.0 / float(positive.min())
    c = bisect(excess, 0.0, c_high, xtol=CALIBRATION_XTOL)
    logger.debug(
        "Calibrated c=%f for a noise rate of %f, expected %f",
        c,
        target_rate,
        excess(c) + target_rate,
    )
    return float(c)


def compose_noise(
    clean,
    rng: np.random.Generator,
    table: Optional[PosteriorTable] = None,
    matrices: Sequence[TransitionMatrix] = (),
) -> Tuple[np.ndarray, np.ndarray]:
    """PMD noise first, if a posterior table is given, then every matrix in order.

    Returns the reference labels that noise rates are measured against and the
    noisy labels. With PMD the reference is the initial most likely class.
    """
    reference = np.asarray(clean, dtype=np.int64)
    noisy = reference
    if table is not None:
        if table.eta.shape[0] != reference.shape[0]:
            raise DimensionError("eta rows", reference.shape[0], table.eta.shape[0])
        reference, noisy = pmd_corrupt(table, rng)

    for matrix in matrices:
        noisy = apply_transition(noisy, matrix, rng)

    return reference, noisy
