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


"""Exceptions that are thrown when configurations are incorrect."""

# can't merge this with exceptions.py, pydantic only catches ValueError,
# TypeError, and AssertionError


class BetaRangeError(ValueError):
    def __init__(self, beta_start, beta_end=None):
        if beta_end is None:
            msg = f"Every beta must be in (0, 1), got {beta_start}"
        else:
            msg = (
                f"Expected 0 < beta_start <= beta_end < 1, "
                f"got beta_start={beta_start} and beta_end={beta_end}"
            )
        super().__init__(msg)


class OddEmbeddingError(ValueError):
    def __init__(self, dim: int):
        super().__init__(f"The time embedding needs an even width, got {dim}")


class StepsExceedTimestepsError(ValueError):
    def __init__(self, steps: int, num_timesteps: int):
        super().__init__(
            f"Can't sample with S={steps} steps from a diffusion with T={num_timesteps}"
        )


class WarmupTooLongError(ValueError):
    def __init__(self, warmup_epochs: int, epochs: int):
        super().__init__(
            f"warmup_epochs={warmup_epochs} has to be smaller than epochs={epochs}"
        )


class NoiseLevelError(ValueError):
    def __init__(self, tau: float):
        super().__init__(f"The noise level tau has to be in [0, 1), got {tau}")


class MappingFixedPointError(ValueError):
    def __init__(self, mapping):
        super().__init__(
            f"Every class has to be mapped to a different class, got {list(mapping)}"
        )


class BlobMeansError(ValueError):
    def __init__(self, msg: str):
        super().__init__(msg)


def pydantify(error: type) -> str:
    """Generate a string as it would appear IN pydantic error types.

    Example pydantic error type: "value_error.betarange" for BetaRangeError.
    """
    lower_classname = error.__name__.lower()
    if lower_classname.endswith("error"):
        return lower_classname[: -len("error")]
    return lower_classname
