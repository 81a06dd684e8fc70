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


"""The immutable setup that forward sampling and the reverse process share."""

from typing import Optional

import numpy as np

try:
    from pydantic.v1 import BaseModel, PositiveInt, root_validator
except ImportError:
    from pydantic import BaseModel, PositiveInt, root_validator

from labeldiffusion.configs.training import DEFAULT_STEPS, FqMode
from labeldiffusion.configs.validation_errors import StepsExceedTimestepsError
from labeldiffusion.diffusion.schedule import NoiseSchedule, Trajectory, ddim_trajectory
from labeldiffusion.exceptions import DimensionError
from labeldiffusion.utils import as_batch


class DiffusionConfig(BaseModel):
    schedule: NoiseSchedule
    S: PositiveInt = DEFAULT_STEPS
    f_q_mode: FqMode = FqMode.ZERO
    n_classes: PositiveInt

    class Config:
        allow_mutation = False
        arbitrary_types_allowed = True

    @root_validator(skip_on_failure=True)
    def steps_fit_into_schedule(cls, values):
        if values["S"] > values["schedule"].T:
            raise StepsExceedTimestepsError(values["S"], values["schedule"].T)
        return values

    @property
    def T(self) -> int:
        return self.schedule.T

    @property
    def trajectory(self) -> Trajectory:
        return ddim_trajectory(self.schedule.T, self.S)

    def with_steps(self, S: int) -> "DiffusionConfig":
        """The same diffusion, sampled along a different number of steps."""
        return DiffusionConfig(
            schedule=self.schedule,
            S=S,
            f_q_mode=self.f_q_mode,
            n_classes=self.n_classes,
        )

    def f_q(self, f_q_x: Optional[np.ndarray], batch_size: int) -> np.ndarray:
        """The latent mean for a batch.

        Always zeros in zero mode, whatever was passed. In provided mode the
        rows of f_q_x are used and have to exist.
        """
        if self.f_q_mode == FqMode.ZERO:
            return np.zeros((batch_size, self.n_classes))

        if f_q_x is None:
            raise DimensionError("f_q(x)", f"({batch_size}, {self.n_classes})", None)

        f_q_x = as_batch(f_q_x, self.n_classes, "f_q(x)")
        if f_q_x.shape[0] != batch_size:
            raise DimensionError(
                "f_q(x)", f"({batch_size}, {self.n_classes})", f_q_x.shape
            )

        return f_q_x
