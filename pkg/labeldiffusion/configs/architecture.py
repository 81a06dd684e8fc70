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


"""Shape of the denoiser network."""

from typing import Tuple

try:
    from pydantic.v1 import BaseModel, PositiveInt, conint, validator
except ImportError:
    from pydantic import BaseModel, PositiveInt, conint, validator

from labeldiffusion.configs.validation_errors import OddEmbeddingError

DEFAULT_HIDDEN = 128
DEFAULT_TIME_EMBED_DIM = 128
DEFAULT_BLOCKS = 3
DEFAULT_NUM_TIMESTEPS = 1000


class Architecture(BaseModel):
    """All dimensions that are needed to build or load a denoiser.

    raw_dim=0 disables the trainable encoder branch for raw input vectors.
    """

    n_classes: PositiveInt
    feat_dim: PositiveInt
    raw_dim: conint(ge=0) = 0  # type: ignore
    hidden: PositiveInt = DEFAULT_HIDDEN
    time_embed_dim: PositiveInt = DEFAULT_TIME_EMBED_DIM
    n_blocks: PositiveInt = DEFAULT_BLOCKS
    num_timesteps: PositiveInt = DEFAULT_NUM_TIMESTEPS

    class Config:
        allow_mutation = False

    @validator("time_embed_dim")
    def embedding_is_even(cls, time_embed_dim: int) -> int:
        if time_embed_dim % 2 != 0:
            raise OddEmbeddingError(time_embed_dim)
        return time_embed_dim

    @property
    def has_raw_branch(self) -> bool:
        return self.raw_dim > 0

    @property
    def block_input_dim(self) -> int:
        """The conditioning streams are concatenated before the first block."""
        return self.hidden * (2 if self.has_raw_branch else 1)

    def as_tuple(self) -> Tuple[int, ...]:
        """The dimensions in the order they are stored in checkpoints."""
        return (
            self.n_classes,
            self.feat_dim,
            self.raw_dim,
            self.hidden,
            self.time_embed_dim,
            self.n_blocks,
            self.num_timesteps,
        )

    @classmethod
    def from_tuple(cls, dims) -> "Architecture":
        names = (
            "n_classes",
            "feat_dim",
            "raw_dim",
            "hidden",
            "time_embed_dim",
            "n_blocks",
            "num_timesteps",
        )
        return cls(**dict(zip(names, dims)))

    def __str__(self):
        return (
            f"Architecture(n={self.n_classes}, feat={self.feat_dim}, "
            f"raw={self.raw_dim}, W={self.hidden}, E={self.time_embed_dim}, "
            f"K={self.n_blocks}, T={self.num_timesteps})"
        )
