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


"""The noise predicting network and its analytic gradients.

Weights are stored as (fan_in, fan_out), so every affine layer is X @ W + b
for a batch X of row vectors.
"""

import enum
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.special import expit

from labeldiffusion.configs.architecture import Architecture
from labeldiffusion.configs.validation_errors import OddEmbeddingError
from labeldiffusion.exceptions import DimensionError, MissingForwardPassError, TimestepError
from labeldiffusion.logger import logger
from labeldiffusion.utils import as_batch, make_rng

BN_EPSILON = 1e-5
BN_MOMENTUM = 0.1

Parameters = Dict[str, np.ndarray]


class Mode(str, enum.Enum):
    TRAIN = "train"
    EVAL = "eval"


def softplus(z: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, z)


def time_embedding(t, dim: int, T: int) -> np.ndarray:
    """Fixed sinusoidal embedding of the diffusion step.

    Entry 2i is sin(t / 10000^(2i/dim)) and entry 2i+1 the matching cosine.
    A scalar t gives a vector, an array of steps gives one row per step.
    """
    if dim % 2 != 0:
        raise OddEmbeddingError(dim)

    steps = np.asarray(t)
    if steps.size and (steps.min() < 1 or steps.max() > T):
        raise TimestepError(t, T)

    frequencies = 10000.0 ** (np.arange(0, dim, 2, dtype=np.float64) / dim)
    angles = steps.astype(np.float64)[..., np.newaxis] / frequencies
    embedding = np.empty(angles.shape[:-1] + (dim,))
    embedding[..., 0::2] = np.sin(angles)
    embedding[..., 1::2] = np.cos(angles)
    return embedding


def parameter_shapes(architecture: Architecture) -> "OrderedDict[str, tuple]":
    """Names and shapes of all trainable tensors in declaration order."""
    n = architecture.n_classes
    width = architecture.hidden
    embed = architecture.time_embed_dim

    shapes: "OrderedDict[str, tuple]" = OrderedDict()
    shapes["cond.weight"] = (n + architecture.feat_dim, width)
    shapes["cond.bias"] = (width,)
    shapes["cond_time.weight"] = (embed, width)
    shapes["cond_time.bias"] = (width,)

    if architecture.has_raw_branch:
        shapes["raw_encoder.weight"] = (architecture.raw_dim, width)
        shapes["raw_encoder.bias"] = (width,)
        shapes["raw.weight"] = (width, width)
        shapes["raw.bias"] = (width,)
        shapes["raw_time.weight"] = (embed, width)
        shapes["raw_time.bias"] = (width,)

    fan_in = architecture.block_input_dim
    for k in range(architecture.n_blocks):
        shapes[f"block{k}.weight"] = (fan_in, width)
        shapes[f"block{k}.bias"] = (width,)
        shapes[f"block{k}.gamma"] = (width,)
        shapes[f"block{k}.beta"] = (width,)
        fan_in = width

    shapes["head.weight"] = (width, n)
    shapes["head.bias"] = (n,)
    return shapes


@dataclass
class _BlockCache:
    inputs: np.ndarray
    xhat: np.ndarray
    inv_std: np.ndarray
    normalized: np.ndarray


@dataclass
class _ForwardCache:
    """Everything backward needs from the last train-mode forward pass."""

    batch_size: int
    conditioning: np.ndarray
    embedding: np.ndarray
    cond_hidden: np.ndarray
    cond_gate: np.ndarray
    raw: Optional[np.ndarray] = None
    raw_pre: Optional[np.ndarray] = None
    raw_encoded: Optional[np.ndarray] = None
    raw_hidden: Optional[np.ndarray] = None
    raw_gate: Optional[np.ndarray] = None
    blocks: List[_BlockCache] = field(default_factory=list)
    head_input: Optional[np.ndarray] = None


class DenoiserModel:
    """eps_theta(y_t, f_p(x), x, t): predicts the noise in a diffused label.

    Conditioning inputs are projected to the hidden width and gated by their own
    projection of the time embedding, concatenated, and then passed through
    n_blocks of affine + batch normalization + softplus and a final affine map.
    """

    def __init__(self, architecture: Architecture, params: Parameters):
        expected = parameter_shapes(architecture)
        if list(params.keys()) != list(expected.keys()):
            raise DimensionError(
                "denoiser parameters", list(expected.keys()), list(params.keys())
            )

        for name, shape in expected.items():
            if params[name].shape != shape:
                raise DimensionError(name, shape, params[name].shape)

        self.architecture = architecture
        self.params: Parameters = OrderedDict(
            (name, np.asarray(value, dtype=np.float64)) for name, value in params.items()
        )
        self.running_mean = [
            np.zeros(architecture.hidden) for _ in range(architecture.n_blocks)
        ]
        self.running_var = [
            np.ones(architecture.hidden) for _ in range(architecture.n_blocks)
        ]
        self.momentum = BN_MOMENTUM
        self._cache: Optional[_ForwardCache] = None

    def __repr__(self):
        return f"DenoiserModel({self.architecture})"

    @property
    def n_parameters(self) -> int:
        return sum(value.size for value in self.params.values())

    def copy(self) -> "DenoiserModel":
        """A deep copy without the cached forward pass."""
        copied = DenoiserModel(
            self.architecture,
            OrderedDict((name, value.copy()) for name, value in self.params.items()),
        )
        copied.running_mean = [value.copy() for value in self.running_mean]
        copied.running_var = [value.copy() for value in self.running_var]
        copied.momentum = self.momentum
        return copied

    def _affine(self, name: str, inputs: np.ndarray) -> np.ndarray:
        return inputs @ self.params[f"{name}.weight"] + self.params[f"{name}.bias"]

    def _check_inputs(self, y_t, f_p_x, x_raw, t):
        architecture = self.architecture
        y_t = as_batch(y_t, architecture.n_classes, "y_t")
        f_p_x = as_batch(f_p_x, architecture.feat_dim, "f_p(x)")
        batch_size = y_t.shape[0]
        if f_p_x.shape[0] != batch_size:
            raise DimensionError("f_p(x) rows", batch_size, f_p_x.shape[0])

        if architecture.has_raw_branch:
            if x_raw is None:
                raise DimensionError("x", f"({batch_size}, {architecture.raw_dim})", None)
            x_raw = as_batch(x_raw, architecture.raw_dim, "x")
            if x_raw.shape[0] != batch_size:
                raise DimensionError("x rows", batch_size, x_raw.shape[0])
        else:
            x_raw = None

        t = np.asarray(t)
        if t.ndim == 0:
            t = np.full(batch_size, int(t))
        elif t.shape != (batch_size,):
            raise DimensionError("t", (batch_size,), t.shape)

        return y_t, f_p_x, x_raw, t

    def forward(self, y_t, f_p_x, x_raw, t, mode: Mode = Mode.EVAL) -> np.ndarray:
        """Predict eps for a batch. Train mode caches what backward needs.

        Parameters
        ----------
        y_t
            (B, n_classes) diffused labels, or a single vector
        f_p_x
            (B, feat_dim) features
        x_raw
            (B, raw_dim) raw inputs, ignored without a raw branch
        t
            a single step for the whole batch, or one step per row
        """
        architecture = self.architecture
        y_t, f_p_x, x_raw, t = self._check_inputs(y_t, f_p_x, x_raw, t)
        train = Mode(mode) == Mode.TRAIN

        embedding = time_embedding(
            t, architecture.time_embed_dim, architecture.num_timesteps
        )
        conditioning = np.concatenate([y_t, f_p_x], axis=1)
        cond_hidden = self._affine("cond", conditioning)
        cond_gate = self._affine("cond_time", embedding)
        hidden = cond_hidden * cond_gate

        cache = _ForwardCache(
            batch_size=y_t.shape[0],
            conditioning=conditioning,
            embedding=embedding,
            cond_hidden=cond_hidden,
            cond_gate=cond_gate,
        )

        if x_raw is not None:
            raw_pre = self._affine("raw_encoder", x_raw)
            raw_encoded = softplus(raw_pre)
            raw_hidden = self._affine("raw", raw_encoded)
            raw_gate = self._affine("raw_time", embedding)
            hidden = np.concatenate([hidden, raw_hidden * raw_gate], axis=1)
            cache.raw = x_raw
            cache.raw_pre = raw_pre
            cache.raw_encoded = raw_encoded
            cache.raw_hidden = raw_hidden
            cache.raw_gate = raw_gate

        for k in range(architecture.n_blocks):
            block_input = hidden
            z = self._affine(f"block{k}", hidden)

            if train:
                mean = z.mean(axis=0)
                var = z.var(axis=0)
                batch_size = z.shape[0]
                unbiased = var * batch_size / (batch_size - 1) if batch_size > 1 else var
                self.running_mean[k] = (
                    1 - self.momentum
                ) * self.running_mean[k] + self.momentum * mean
                self.running_var[k] = (
                    1 - self.momentum
                ) * self.running_var[k] + self.momentum * unbiased
            else:
                mean = self.running_mean[k]
                var = self.running_var[k]

            inv_std = 1.0 / np.sqrt(var + BN_EPSILON)
            xhat = (z - mean) * inv_std
            normalized = self.params[f"block{k}.gamma"] * xhat + self.params[f"block{k}.beta"]
            hidden = softplus(normalized)
            cache.blocks.append(_BlockCache(block_input, xhat, inv_std, normalized))

        cache.head_input = hidden
        eps_hat = self._affine("head", hidden)

        if train:
            self._cache = cache

        return eps_hat

    def predict(self, y_t, f_p_x, x_raw, t) -> np.ndarray:
        """Eval-mode forward, a pure function of the parameters and inputs."""
        return self.forward(y_t, f_p_x, x_raw, t, Mode.EVAL)

    def backward(self, output_grad: np.ndarray) -> Parameters:
        """Gradients of a loss with respect to every parameter.

        output_grad is dloss/deps_hat of the last train-mode forward pass. The
        cache is kept, so calling this twice yields the same result.
        """
        cache = self._cache
        if cache is None:
            raise MissingForwardPassError()

        output_grad = np.asarray(output_grad, dtype=np.float64)
        expected_shape = (cache.batch_size, self.architecture.n_classes)
        if output_grad.shape != expected_shape:
            raise MissingForwardPassError(
                f"Gradient of shape {output_grad.shape} doesn't belong to the "
                f"forward pass with output shape {expected_shape}"
            )

        params = self.params
        grads: Parameters = OrderedDict()
        width = self.architecture.hidden

        grads["head.weight"] = cache.head_input.T @ output_grad
        grads["head.bias"] = output_grad.sum(axis=0)
        hidden_grad = output_grad @ params["head.weight"].T

        for k in reversed(range(self.architecture.n_blocks)):
            block = cache.blocks[k]
            normalized_grad = hidden_grad * expit(block.normalized)
            grads[f"block{k}.gamma"] = (normalized_grad * block.xhat).sum(axis=0)
            grads[f"block{k}.beta"] = normalized_grad.sum(axis=0)

            xhat_grad = normalized_grad * params[f"block{k}.gamma"]
            batch_size = xhat_grad.shape[0]
            z_grad = (block.inv_std / batch_size) * (
                batch_size * xhat_grad
                - xhat_grad.sum(axis=0)
                - block.xhat * (xhat_grad * block.xhat).sum(axis=0)
            )

            grads[f"block{k}.weight"] = block.inputs.T @ z_grad
            grads[f"block{k}.bias"] = z_grad.sum(axis=0)
            hidden_grad = z_grad @ params[f"block{k}.weight"].T

        cond_grad = hidden_grad[:, :width]
        cond_hidden_grad = cond_grad * cache.cond_gate
        cond_gate_grad = cond_grad * cache.cond_hidden
        grads["cond.weight"] = cache.conditioning.T @ cond_hidden_grad
        grads["cond.bias"] = cond_hidden_grad.sum(axis=0)
        grads["cond_time.weight"] = cache.embedding.T @ cond_gate_grad
        grads["cond_time.bias"] = cond_gate_grad.sum(axis=0)

        if cache.raw is not None:
            raw_grad = hidden_grad[:, width:]
            raw_hidden_grad = raw_grad * cache.raw_gate
            raw_gate_grad = raw_grad * cache.raw_hidden
            grads["raw.weight"] = cache.raw_encoded.T @ raw_hidden_grad
            grads["raw.bias"] = raw_hidden_grad.sum(axis=0)
            grads["raw_time.weight"] = cache.embedding.T @ raw_gate_grad
            grads["raw_time.bias"] = raw_gate_grad.sum(axis=0)

            encoded_grad = raw_hidden_grad @ params["raw.weight"].T
            pre_grad = encoded_grad * expit(cache.raw_pre)
            grads["raw_encoder.weight"] = cache.raw.T @ pre_grad
            grads["raw_encoder.bias"] = pre_grad.sum(axis=0)

        # same order as the parameters
        return OrderedDict((name, grads[name]) for name in params)


def init_model(
    n_classes: int,
    feat_dim: int,
    raw_dim: int = 0,
    hidden: int = 128,
    time_embed_dim: int = 128,
    K: int = 3,
    seed: int = 0,
    num_timesteps: int = 1000,
) -> DenoiserModel:
    """Build a denoiser with fan-in scaled uniform weights, deterministic in seed.

    Raises a pydantic ValidationError for invalid dimensions.
    """
    architecture = Architecture(
        n_classes=n_classes,
        feat_dim=feat_dim,
        raw_dim=raw_dim,
        hidden=hidden,
        time_embed_dim=time_embed_dim,
        n_blocks=K,
        num_timesteps=num_timesteps,
    )
    return init_from_architecture(architecture, seed)


def init_from_architecture(architecture: Architecture, seed: int = 0) -> DenoiserModel:
    rng = make_rng(seed)
    shapes = parameter_shapes(architecture)
    params: Parameters = OrderedDict()
    fan_in = 1
    for name, shape in shapes.items():
        if name.endswith(".gamma"):
            params[name] = np.ones(shape)
        elif name.endswith(".beta"):
            params[name] = np.zeros(shape)
        else:
            if name.endswith(".weight"):
                fan_in = shape[0]
            # a bias shares the bound of the weight declared right before it
            bound = 1.0 / np.sqrt(fan_in)
            params[name] = rng.uniform(-bound, bound, size=shape)

    model = DenoiserModel(architecture, params)
    logger.debug("Initialized %s with %d parameters", model, model.n_parameters)
    return model


def forward(model: DenoiserModel, y_t, f_p_x, x_raw, t, mode: Mode = Mode.EVAL):
    return model.forward(y_t, f_p_x, x_raw, t, mode)


def backward(model: DenoiserModel, output_grad: np.ndarray) -> Parameters:
    return model.backward(output_grad)
