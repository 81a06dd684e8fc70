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


"""Adam and the warmup + half-cycle cosine learning rate."""

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from labeldiffusion.diffusion.denoiser import DenoiserModel, Parameters
from labeldiffusion.exceptions import DimensionError, DivergenceError, EpochRangeError

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8


@dataclass
class OptimizerState:
    step_count: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=OrderedDict)
    base_lr: float = 0.001
    warmup_epochs: int = 0
    total_epochs: int = 1
    beta1: float = ADAM_BETA1
    beta2: float = ADAM_BETA2
    epsilon: float = ADAM_EPSILON


def init_optimizer(
    model: DenoiserModel,
    base_lr: float = 0.001,
    warmup_epochs: int = 0,
    total_epochs: int = 1,
) -> OptimizerState:
    """Zeroed moments for every parameter of the model."""
    return OptimizerState(
        step_count=0,
        first_moment=OrderedDict(
            (name, np.zeros_like(value)) for name, value in model.params.items()
        ),
        second_moment=OrderedDict(
            (name, np.zeros_like(value)) for name, value in model.params.items()
        ),
        base_lr=base_lr,
        warmup_epochs=warmup_epochs,
        total_epochs=total_epochs,
    )


def adam_step(
    model: DenoiserModel,
    state: OptimizerState,
    gradients: Parameters,
    lr_now: float,
) -> None:
    """Bias corrected Adam update of the model and the state, in place.

    Nothing is modified if a gradient or an updated parameter is not finite.
    """
    if list(gradients.keys()) != list(model.params.keys()):
        raise DimensionError(
            "gradients", list(model.params.keys()), list(gradients.keys())
        )

    step = state.step_count + 1
    for name, gradient in gradients.items():
        if not np.all(np.isfinite(gradient)):
            raise DivergenceError(f'gradient of "{name}"', step)

    first_correction = 1.0 - state.beta1**step
    second_correction = 1.0 - state.beta2**step

    updates = OrderedDict()
    for name, gradient in gradients.items():
        first = state.beta1 * state.first_moment[name] + (1 - state.beta1) * gradient
        second = state.beta2 * state.second_moment[name] + (1 - state.beta2) * (
            gradient * gradient
        )
        first_hat = first / first_correction
        second_hat = second / second_correction
        value = model.params[name] - lr_now * first_hat / (
            np.sqrt(second_hat) + state.epsilon
        )
        if not np.all(np.isfinite(value)):
            raise DivergenceError(f'parameter "{name}"', step)

        updates[name] = (first, second, value)

    for name, (first, second, value) in updates.items():
        state.first_moment[name] = first
        state.second_moment[name] = second
        model.params[name] = value

    state.step_count = step


def lr_at(epoch: float, state: OptimizerState) -> float:
    """Learning rate at a possibly fractional epoch.

    Linear ramp from 0 to base_lr during the warmup, then half a cosine cycle.
    """
    total = state.total_epochs
    warmup = state.warmup_epochs
    if not 0 <= epoch < total:
        raise EpochRangeError(epoch, total)

    if epoch < warmup:
        return state.base_lr * epoch / warmup

    progress = (epoch - warmup) / (total - warmup)
    return state.base_lr * 0.5 * (1.0 + math.cos(math.pi * progress))
