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


"""Exceptions specific to labeldiffusion."""

from typing import Optional


class Error(Exception):
    """Base class for exceptions in labeldiffusion.

    We can catch all labeldiffusion exceptions with this.
    """


class DimensionError(Error):
    """Arrays or architectures don't fit together."""

    def __init__(self, what: str, expected, got):
        self.expected = expected
        self.got = got
        super().__init__(f"{what}: expected {expected}, got {got}")


class TimestepError(Error):
    """A diffusion step outside of 1..T."""

    def __init__(self, t, num_timesteps: int):
        super().__init__(f"Timestep {t} is outside of [1, {num_timesteps}]")


class TrajectoryError(Error):
    """A sampling trajectory or a pair of trajectory steps is invalid."""

    def __init__(self, msg: str):
        super().__init__(msg)


class SigmaConstraintError(Error):
    """The non-markovian sampler got a sigma that exceeds 1 - alpha_bar[t-1]."""

    def __init__(self, t: int, sigma_squared: float, bound: float):
        super().__init__(
            f"sigma_t^2 = {sigma_squared} at t={t} violates 0 <= sigma_t^2 <= {bound}"
        )


class MissingForwardPassError(Error):
    """backward was called without a matching train-mode forward pass."""

    def __init__(self, msg: str = "No train-mode forward pass to differentiate"):
        super().__init__(msg)


class DivergenceError(Error):
    """Training produced non-finite values."""

    def __init__(self, where: str, step: Optional[int] = None):
        suffix = f" at step {step}" if step is not None else ""
        super().__init__(f"Non-finite values in {where}{suffix}, training diverged")


class CorruptFileError(Error):
    """A binary file has a wrong magic, an unknown version or a wrong length."""

    def __init__(self, path, msg: str):
        self.path = path
        super().__init__(f'"{path}": {msg}')


class LabelRangeError(Error):
    """A class id is not smaller than the number of classes."""

    def __init__(self, label: int, n_classes: int):
        super().__init__(f"Label {label} is out of range for {n_classes} classes")


class EmptyDatasetError(Error):
    """Something needs at least one point."""

    def __init__(self, what: str):
        super().__init__(f"{what} is empty")


class NoiseRateUnreachableError(Error):
    """PMD noise can't produce the requested flip rate on this posterior table."""

    def __init__(self, target: float, maximum: float):
        super().__init__(
            f"A noise rate of {target} is not reachable, the maximum is {maximum}"
        )


class SimplexError(Error):
    """Rows that should be probability vectors are not."""

    def __init__(self, what: str, row: int):
        super().__init__(f"Row {row} of {what} is not on the probability simplex")


class EpochRangeError(Error):
    """The learning rate schedule was asked for an epoch outside of training."""

    def __init__(self, epoch: float, total_epochs: int):
        super().__init__(f"Epoch {epoch} is outside of [0, {total_epochs})")


class NeighborCountError(Error):
    """More neighbors were requested than the index can provide."""

    def __init__(self, k: int, available: int):
        super().__init__(f"Can't retrieve {k} neighbors, only {available} available")


class ZeroVectorError(Error):
    """A vector without a direction can't be compared by cosine distance."""

    def __init__(self, what: str, row: int):
        super().__init__(f"Row {row} of {what} has zero norm")


class ZeroVarianceError(Error):
    """The posterior of blobs without spread is undefined."""

    def __init__(self):
        super().__init__("The posterior requires a positive blob sigma")


class OverwriteInputError(Error):
    """A command was asked to write into one of its own input files."""

    def __init__(self, path):
        super().__init__(f'Refusing to overwrite the input file "{path}"')
