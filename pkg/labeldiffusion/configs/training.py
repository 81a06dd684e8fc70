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


"""Validated settings of the train and infer commands."""

import enum
from typing import Optional

try:
    from pydantic.v1 import (
        BaseModel,
        PositiveFloat,
        PositiveInt,
        conint,
        root_validator,
        validator,
    )
except ImportError:
    from pydantic import (
        BaseModel,
        PositiveFloat,
        PositiveInt,
        conint,
        root_validator,
        validator,
    )

from labeldiffusion.configs.architecture import (
    DEFAULT_BLOCKS,
    DEFAULT_HIDDEN,
    DEFAULT_NUM_TIMESTEPS,
    DEFAULT_TIME_EMBED_DIM,
)
from labeldiffusion.configs.validation_errors import (
    BetaRangeError,
    OddEmbeddingError,
    StepsExceedTimestepsError,
    WarmupTooLongError,
)

DEFAULT_STEPS = 10
DEFAULT_NEIGHBORS = 10
DEFAULT_EPOCHS = 200
DEFAULT_BATCH_SIZE = 256
DEFAULT_LR = 0.001
DEFAULT_VOTES = 25
DEFAULT_CHUNK_SIZE = 1024


class Metric(str, enum.Enum):
    """How distances in the feature space are measured."""

    EUCLIDEAN = "euclidean"
    COSINE = "cosine"


class TargetMode(str, enum.Enum):
    """How training targets are made from a candidate set."""

    # one label drawn uniformly from the candidates, as one-hot
    SAMPLE = "sample"
    # the average of all one-hot candidates
    MEAN = "mean"


class InferMode(str, enum.Enum):
    MLE = "mle"
    VOTE = "vote"


class FqMode(str, enum.Enum):
    """Where the mean of the latent distribution comes from."""

    ZERO = "zero"
    PROVIDED = "provided"


class Cfg:
    allow_mutation = False
    use_enum_values = False


class TrainConfig(BaseModel):
    """Everything that influences a training run, apart from the data."""

    T: PositiveInt = DEFAULT_NUM_TIMESTEPS
    S: PositiveInt = DEFAULT_STEPS
    k: conint(ge=0) = DEFAULT_NEIGHBORS  # type: ignore
    metric: Metric = Metric.EUCLIDEAN
    beta_start: PositiveFloat = 1e-4
    beta_end: PositiveFloat = 0.02
    hidden: PositiveInt = DEFAULT_HIDDEN
    time_embed_dim: PositiveInt = DEFAULT_TIME_EMBED_DIM
    n_blocks: PositiveInt = DEFAULT_BLOCKS
    epochs: PositiveInt = DEFAULT_EPOCHS
    batch_size: PositiveInt = DEFAULT_BATCH_SIZE
    lr: PositiveFloat = DEFAULT_LR
    # None means epochs // 20
    warmup_epochs: Optional[conint(ge=0)] = None  # type: ignore
    seed: int = 0
    target_mode: TargetMode = TargetMode.SAMPLE
    f_q_mode: FqMode = FqMode.ZERO
    threads: PositiveInt = 1

    Config = Cfg

    @validator("time_embed_dim")
    def embedding_is_even(cls, time_embed_dim: int) -> int:
        if time_embed_dim % 2 != 0:
            raise OddEmbeddingError(time_embed_dim)
        return time_embed_dim

    @root_validator(skip_on_failure=True)
    def steps_fit_into_timesteps(cls, values):
        if values["S"] > values["T"]:
            raise StepsExceedTimestepsError(values["S"], values["T"])
        return values

    @root_validator(skip_on_failure=True)
    def betas_in_range(cls, values):
        if not values["beta_start"] <= values["beta_end"] < 1:
            raise BetaRangeError(values["beta_start"], values["beta_end"])
        return values

    @root_validator(skip_on_failure=True)
    def default_warmup(cls, values):
        epochs = values["epochs"]
        if values.get("warmup_epochs") is None:
            values["warmup_epochs"] = epochs // 20

        if values["warmup_epochs"] >= epochs:
            raise WarmupTooLongError(values["warmup_epochs"], epochs)

        return values


class InferConfig(BaseModel):
    """Settings of inference with a trained denoiser."""

    S: PositiveInt = DEFAULT_STEPS
    mode: InferMode = InferMode.MLE
    n_samples: PositiveInt = DEFAULT_VOTES
    seed: int = 0
    threads: PositiveInt = 1
    chunk_size: PositiveInt = DEFAULT_CHUNK_SIZE

    Config = Cfg
