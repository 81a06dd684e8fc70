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


"""Bit exact binary checkpoints of the denoiser and its optimizer.

Layout, all little-endian:

    "LRDM" u32 version
    u32 n_classes feat_dim raw_dim hidden time_embed_dim n_blocks num_timesteps
    f64 parameters, declaration order, row-major
    f64 running mean and running variance of every block, then the momentum
    "OPTS" u32 version u64 step f64 base_lr u32 warmup u32 total f64 b1 b2 eps
    f64 first moments, then f64 second moments, declaration order

Full checkpoints append the diffusion setup:

    "DIFF" u32 version u32 f_q_mode u32 S u32 T f64 betas
"""

import struct
from collections import OrderedDict
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from labeldiffusion.configs.architecture import Architecture
from labeldiffusion.configs.diffusion_config import DiffusionConfig
from labeldiffusion.configs.training import FqMode
from labeldiffusion.diffusion.denoiser import DenoiserModel, parameter_shapes
from labeldiffusion.diffusion.optimizer import OptimizerState
from labeldiffusion.diffusion.schedule import NoiseSchedule
from labeldiffusion.exceptions import CorruptFileError, DimensionError
from labeldiffusion.logger import logger
from labeldiffusion.paths import PathLike, prepare_output

MODEL_MAGIC = b"LRDM"
OPTIMIZER_MAGIC = b"OPTS"
DIFFUSION_MAGIC = b"DIFF"
MODEL_VERSION = 1
OPTIMIZER_VERSION = 1
DIFFUSION_VERSION = 1

_FQ_MODES = (FqMode.ZERO, FqMode.PROVIDED)


@dataclass
class Checkpoint:
    model: DenoiserModel
    optimizer: OptimizerState
    diffusion: DiffusionConfig


class _Reader:
    """Consumes a byte string front to back, raising on truncation."""

    def __init__(self, data: bytes, source):
        self.data = data
        self.source = source
        self.offset = 0

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise CorruptFileError(
                self.source,
                f"Truncated at byte {len(self.data)}, "
                f"expected at least {self.offset + size}",
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str) -> Tuple:
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def magic(self, expected: bytes, what: str):
        found = self.take(len(expected))
        if found != expected:
            raise CorruptFileError(
                self.source, f"Expected {what} magic {expected!r}, found {found!r}"
            )

    def version(self, supported: int, what: str):
        (version,) = self.unpack("<I")
        if version != supported:
            raise CorruptFileError(self.source, f"Unsupported {what} version {version}")

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(self.take(count * 8), dtype="<f8")
        return values.astype(np.float64).reshape(shape)

    def at_end(self) -> bool:
        return self.offset == len(self.data)

    def expect_end(self):
        if not self.at_end():
            raise CorruptFileError(
                self.source, f"{len(self.data) - self.offset} unexpected trailing bytes"
            )


def _tensor_bytes(value: np.ndarray) -> bytes:
    return np.ascontiguousarray(value, dtype="<f8").tobytes()


def save_params(model: DenoiserModel, optimizer: OptimizerState) -> bytes:
    """Serialize the model and its optimizer state."""
    architecture = model.architecture
    chunks = [
        MODEL_MAGIC,
        struct.pack("<I", MODEL_VERSION),
        struct.pack("<7I", *architecture.as_tuple()),
    ]
    chunks.extend(_tensor_bytes(value) for value in model.params.values())
    for mean, var in zip(model.running_mean, model.running_var):
        chunks.append(_tensor_bytes(mean))
        chunks.append(_tensor_bytes(var))
    chunks.append(struct.pack("<d", model.momentum))

    chunks.append(OPTIMIZER_MAGIC)
    chunks.append(struct.pack("<IQ", OPTIMIZER_VERSION, optimizer.step_count))
    chunks.append(
        struct.pack(
            "<dII3d",
            optimizer.base_lr,
            optimizer.warmup_epochs,
            optimizer.total_epochs,
            optimizer.beta1,
            optimizer.beta2,
            optimizer.epsilon,
        )
    )
    for name in model.params:
        chunks.append(_tensor_bytes(optimizer.first_moment[name]))
    for name in model.params:
        chunks.append(_tensor_bytes(optimizer.second_moment[name]))

    return b"".join(chunks)


def _read_params(
    reader: _Reader, expect: Optional[Architecture]
) -> Tuple[DenoiserModel, OptimizerState]:
    reader.magic(MODEL_MAGIC, "model")
    reader.version(MODEL_VERSION, "model")
    dims = reader.unpack("<7I")
    try:
        architecture = Architecture.from_tuple(dims)
    except ValueError as error:
        # includes pydantic.ValidationError
        raise CorruptFileError(reader.source, f"Invalid architecture {dims}") from error

    if expect is not None and expect.as_tuple() != architecture.as_tuple():
        raise DimensionError("checkpoint architecture", expect, architecture)

    shapes = parameter_shapes(architecture)
    params = OrderedDict((name, reader.array(shape)) for name, shape in shapes.items())
    model = DenoiserModel(architecture, params)
    for k in range(architecture.n_blocks):
        model.running_mean[k] = reader.array((architecture.hidden,))
        model.running_var[k] = reader.array((architecture.hidden,))
    (model.momentum,) = reader.unpack("<d")

    reader.magic(OPTIMIZER_MAGIC, "optimizer")
    reader.version(OPTIMIZER_VERSION, "optimizer")
    (step_count,) = reader.unpack("<Q")
    base_lr, warmup, total, beta1, beta2, epsilon = reader.unpack("<dII3d")
    first = OrderedDict((name, reader.array(shape)) for name, shape in shapes.items())
    second = OrderedDict((name, reader.array(shape)) for name, shape in shapes.items())
    optimizer = OptimizerState(
        step_count=step_count,
        first_moment=first,
        second_moment=second,
        base_lr=base_lr,
        warmup_epochs=warmup,
        total_epochs=total,
        beta1=beta1,
        beta2=beta2,
        epsilon=epsilon,
    )
    return model, optimizer


def load_params(
    data: bytes,
    expect: Optional[Architecture] = None,
    source="<bytes>",
) -> Tuple[DenoiserModel, OptimizerState]:
    """Inverse of save_params.

    Parameters
    ----------
    expect
        if set, a checkpoint of any other architecture raises a DimensionError
    source
        shown in error messages
    """
    reader = _Reader(data, source)
    result = _read_params(reader, expect)
    reader.expect_end()
    return result


def save_checkpoint(
    path: PathLike,
    model: DenoiserModel,
    optimizer: OptimizerState,
    diffusion: DiffusionConfig,
):
    """Write params, optimizer state and the diffusion setup to a file."""
    if diffusion.schedule.T != model.architecture.num_timesteps:
        raise DimensionError(
            "schedule length", model.architecture.num_timesteps, diffusion.schedule.T
        )

    trailer = [
        DIFFUSION_MAGIC,
        struct.pack(
            "<4I",
            DIFFUSION_VERSION,
            _FQ_MODES.index(FqMode(diffusion.f_q_mode)),
            diffusion.S,
            diffusion.schedule.T,
        ),
        _tensor_bytes(diffusion.schedule.beta),
    ]

    path = prepare_output(path)
    with open(path, "wb") as file:
        file.write(save_params(model, optimizer))
        file.write(b"".join(trailer))

    logger.debug('Wrote checkpoint "%s"', path)


def load_checkpoint(path: PathLike, expect: Optional[Architecture] = None) -> Checkpoint:
    with open(path, "rb") as file:
        data = file.read()

    reader = _Reader(data, path)
    model, optimizer = _read_params(reader, expect)

    reader.magic(DIFFUSION_MAGIC, "diffusion")
    reader.version(DIFFUSION_VERSION, "diffusion")
    fq_index, steps, num_timesteps = reader.unpack("<3I")
    if fq_index >= len(_FQ_MODES):
        raise CorruptFileError(path, f"Unknown f_q mode {fq_index}")

    if num_timesteps != model.architecture.num_timesteps:
        raise CorruptFileError(
            path,
            f"Schedule of length {num_timesteps} doesn't match "
            f"T={model.architecture.num_timesteps} of the model",
        )

    betas = reader.array((num_timesteps,))
    reader.expect_end()

    diffusion = DiffusionConfig(
        schedule=NoiseSchedule.from_betas(betas),
        S=steps,
        f_q_mode=_FQ_MODES[fq_index],
        n_classes=model.architecture.n_classes,
    )
    logger.debug('Loaded checkpoint "%s" of %s', path, model)
    return Checkpoint(model=model, optimizer=optimizer, diffusion=diffusion)
