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

"""The variance schedule of the label diffusion and its sampling trajectories.

Timesteps are 1 based: t runs from 1 to T, and alpha_bar(0) = 1.
"""

from dataclasses import dataclass
from typing import Iterator, Sequence, Tuple, Union

import numpy as np

try:
    from pydantic.v1 import BaseModel, PositiveInt, root_validator
except ImportError:
    from pydantic import BaseModel, PositiveInt, root_validator

from labeldiffusion.configs.validation_errors import BetaRangeError
from labeldiffusion.exceptions import DimensionError, TimestepError, TrajectoryError

DEFAULT_T = 1000
DEFAULT_BETA_START = 1e-4
DEFAULT_BETA_END = 0.02

Timesteps = Union[int, Sequence[int], np.ndarray]


class LinearScheduleConfig(BaseModel):
    """Parameters of a schedule that is linear in beta."""

    T: PositiveInt = DEFAULT_T
    beta_start: float = DEFAULT_BETA_START
    beta_end: float = DEFAULT_BETA_END

    @root_validator(skip_on_failure=True)
    def betas_in_range(cls, values):
        beta_start = values.get("beta_start")
        beta_end = values.get("beta_end")
        if not 0 < beta_start <= beta_end < 1:
            raise BetaRangeError(beta_start, beta_end)
        return values

    class Config:
        allow_mutation = False


@dataclass(frozen=True)
class NoiseSchedule:
    """beta, alpha_bar and the posterior variance for t = 1..T.

    Arrays are 0 based, so beta[t - 1] is beta_t. Use the accessors for 1 based
    lookups that also know about alpha_bar(0) = 1.
    """

    beta: np.ndarray
    alpha_bar: np.ndarray
    posterior_var: np.ndarray

    @classmethod
    def from_betas(cls, betas: Sequence[float]) -> "NoiseSchedule":
        beta = np.array(betas, dtype=np.float64)
        if beta.ndim != 1 or beta.shape[0] == 0:
            raise DimensionError("betas", "a non-empty vector", beta.shape)

        outside = (beta <= 0) | (beta >= 1) | ~np.isfinite(beta)
        if outside.any():
            raise BetaRangeError(float(beta[np.argmax(outside)]))

        # sequential product, identical to multiplying by hand step by step
        alpha_bar = np.cumprod(1.0 - beta)
        alpha_bar_prev = np.concatenate([[1.0], alpha_bar[:-1]])
        posterior_var = (1.0 - alpha_bar_prev) / (1.0 - alpha_bar) * beta

        for array in (beta, alpha_bar, posterior_var):
            array.setflags(write=False)

        return cls(beta=beta, alpha_bar=alpha_bar, posterior_var=posterior_var)

    @property
    def T(self) -> int:
        return int(self.beta.shape[0])

    def check_timesteps(self, t: Timesteps, allow_zero: bool = False) -> np.ndarray:
        """Return t as an integer array, raise if anything is outside of [1, T]."""
        array = np.asarray(t)
        if array.size and not np.issubdtype(array.dtype, np.integer):
            if not np.all(np.mod(array, 1) == 0):
                raise TimestepError(t, self.T)
        array = array.astype(np.int64)
        lowest = 0 if allow_zero else 1
        if array.size and (array.min() < lowest or array.max() > self.T):
            raise TimestepError(t, self.T)
        return array

    def alpha_bar_at(self, t: Timesteps) -> np.ndarray:
        """alpha_bar for 1 based timesteps, alpha_bar(0) = 1."""
        t = self.check_timesteps(t, allow_zero=True)
        padded = np.concatenate([[1.0], self.alpha_bar])
        return padded[t]

    def __eq__(self, other) -> bool:
        if not isinstance(other, NoiseSchedule):
            return NotImplemented
        return np.array_equal(self.beta, other.beta)

    def __hash__(self):
        return hash(self.beta.tobytes())


def linear_beta_schedule(
    T: int = DEFAULT_T,
    beta_start: float = DEFAULT_BETA_START,
    beta_end: float = DEFAULT_BETA_END,
) -> NoiseSchedule:
    """Betas linearly interpolated from beta_start to beta_end, both inclusive."""
    # raises pydantic.ValidationError
    config = LinearScheduleConfig(T=T, beta_start=beta_start, beta_end=beta_end)
    return NoiseSchedule.from_betas(
        np.linspace(config.beta_start, config.beta_end, config.T)
    )


def posterior_variance(schedule: NoiseSchedule, t: int) -> float:
    """(1 - alpha_bar(t-1)) / (1 - alpha_bar(t)) * beta_t."""
    t = int(schedule.check_timesteps(t))
    return float(schedule.posterior_var[t - 1])


@dataclass(frozen=True)
class Trajectory:
    """Strictly increasing timesteps tau_1 = 1 < ... < tau_S = T to sample along."""

    tau: Tuple[int, ...]

    def __post_init__(self):
        tau = self.tau
        if len(tau) == 0:
            raise TrajectoryError("A trajectory needs at least one step")

        if any(b <= a for a, b in zip(tau, tau[1:])):
            raise TrajectoryError(f"Trajectory {tau} is not strictly increasing")

        if tau[0] < 1:
            raise TrajectoryError(f"Trajectory {tau} starts before t=1")

    @property
    def S(self) -> int:
        return len(self.tau)

    def __iter__(self) -> Iterator[int]:
        return iter(self.tau)

    def __len__(self) -> int:
        return len(self.tau)

    def __contains__(self, t) -> bool:
        return t in self.tau

    def reverse_pairs(self) -> Iterator[Tuple[int, int]]:
        """(tau_s, tau_{s-1}) from T down to the pair that ends in tau_1."""
        for s in range(len(self.tau) - 1, 0, -1):
            yield self.tau[s], self.tau[s - 1]


def ddim_trajectory(T: int, S: int) -> Trajectory:
    """Uniformly spaced trajectory from 1 to T with S steps, rounded half up."""
    if T < 1:
        raise TrajectoryError(f"T has to be positive, got {T}")

    if S < 1 or S > T:
        raise TrajectoryError(f"Expected 1 <= S <= T, got S={S} and T={T}")

    if S == 1:
        return Trajectory((T,))

    # round(1 + (s - 1) * (T - 1) / (S - 1)) in integers, no float ties
    denominator = 2 * (S - 1)
    tau = tuple(
        1 + (2 * s * (T - 1) + (S - 1)) // denominator for s in range(S)
    )
    return Trajectory(tau)
