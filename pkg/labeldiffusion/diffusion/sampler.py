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


"""Forward diffusion of labels, the training objective and the reverse process.

Label vectors are (B, n_classes) float arrays. A single vector is treated as a
batch of one.
"""

from dataclasses import dataclass
from typing import Optional, Protocol, Sequence, Tuple

import numpy as np

from labeldiffusion.configs.diffusion_config import DiffusionConfig
from labeldiffusion.diffusion.denoiser import DenoiserModel, Mode
from labeldiffusion.diffusion.schedule import NoiseSchedule, Trajectory
from labeldiffusion.exceptions import (
    DimensionError,
    EmptyDatasetError,
    SigmaConstraintError,
    SimplexError,
    TrajectoryError,
)
from labeldiffusion.logger import logger
from labeldiffusion.utils import argmax_rows, as_batch, chunk_slices, parallel_map

# slack for sigma_t^2 <= 1 - alpha_bar(t-1) when sigma is computed in floats
SIGMA_TOLERANCE = 1e-12


class EpsilonModel(Protocol):
    """Anything that predicts the noise of a diffused label."""

    def predict(self, y_t, f_p_x, x_raw, t) -> np.ndarray:
        ...


@dataclass
class LossResult:
    loss: float
    # dloss/deps_hat, feed into DenoiserModel.backward
    output_grad: np.ndarray
    t: np.ndarray
    eps: np.ndarray


def _labels(cfg: DiffusionConfig, values, what: str) -> np.ndarray:
    return as_batch(values, cfg.n_classes, what)


def _rows(values: Optional[np.ndarray], batch_size: int, what: str):
    """Slice-friendly optional input, checked to have one row per item."""
    if values is None:
        return None

    values = np.asarray(values, dtype=np.float64)
    if values.ndim == 1:
        values = values[np.newaxis, :]

    if values.shape[0] != batch_size:
        raise DimensionError(f"{what} rows", batch_size, values.shape[0])

    return values


def _coefficients(schedule: NoiseSchedule, t) -> Tuple[np.ndarray, np.ndarray]:
    """sqrt(alpha_bar_t) and sqrt(1 - alpha_bar_t) as columns."""
    alpha_bar = np.atleast_1d(schedule.alpha_bar_at(t))[:, np.newaxis]
    return np.sqrt(alpha_bar), np.sqrt(1.0 - alpha_bar)


def _per_row(t, batch_size: int) -> np.ndarray:
    t = np.asarray(t)
    if t.ndim == 0:
        return np.full(batch_size, int(t))
    if t.shape != (batch_size,):
        raise DimensionError("t", (batch_size,), t.shape)
    return t


def forward_sample(
    cfg: DiffusionConfig,
    y0,
    f_q_x,
    t,
    eps=None,
    rng: Optional[np.random.Generator] = None,
) -> np.ndarray:
    """Draw y_t from q(y_t | y_0, f_q(x)) in closed form.

    eps is drawn from rng when it isn't given.
    """
    y0 = _labels(cfg, y0, "y_0")
    batch_size = y0.shape[0]
    f_q = cfg.f_q(f_q_x, batch_size)
    t = cfg.schedule.check_timesteps(_per_row(t, batch_size))

    if eps is None:
        if rng is None:
            raise ValueError("Either eps or rng is required")
        eps = rng.standard_normal(y0.shape)

    eps = _labels(cfg, eps, "eps")
    if eps.shape != y0.shape:
        raise DimensionError("eps", y0.shape, eps.shape)

    signal, noise = _coefficients(cfg.schedule, t)
    return signal * y0 + (1.0 - signal) * f_q + noise * eps


def training_loss(
    cfg: DiffusionConfig,
    model: DenoiserModel,
    y0,
    f_p_x,
    x_raw,
    f_q_x,
    rng: np.random.Generator,
    t=None,
    eps=None,
) -> LossResult:
    """Mean over the batch of ||eps - eps_theta(y_t, x, f_p(x), t)||^2.

    t is uniform on 1..T and eps standard normal per item, unless given. The
    model runs in train mode, so model.backward(result.output_grad) afterwards
    yields the parameter gradients.
    """
    y0 = _labels(cfg, y0, "y_0")
    batch_size = y0.shape[0]
    if batch_size == 0:
        raise EmptyDatasetError("The training batch")

    # one-hot targets and the mean targets of the neighborhood
    if np.any(y0 < 0) or not np.allclose(y0.sum(axis=1), 1.0):
        bad = np.flatnonzero((y0 < 0).any(axis=1) | ~np.isclose(y0.sum(axis=1), 1.0))
        raise SimplexError("y_0", int(bad[0]))

    if t is None:
        t = rng.integers(1, cfg.T + 1, size=batch_size)
    if eps is None:
        eps = rng.standard_normal(y0.shape)

    t = _per_row(t, batch_size)
    eps = np.asarray(eps, dtype=np.float64).reshape(y0.shape)
    y_t = forward_sample(cfg, y0, f_q_x, t, eps)

    eps_hat = model.forward(y_t, f_p_x, x_raw, t, Mode.TRAIN)
    difference = eps_hat - eps
    loss = float(np.sum(difference * difference) / batch_size)
    return LossResult(
        loss=loss,
        output_grad=2.0 * difference / batch_size,
        t=t,
        eps=eps,
    )


def _denoise(
    schedule: NoiseSchedule, y_tau, f_q, tau, eps_hat
) -> np.ndarray:
    signal, noise = _coefficients(schedule, tau)
    return (y_tau - (1.0 - signal) * f_q - noise * eps_hat) / signal


def denoised_label(
    cfg: DiffusionConfig,
    model: EpsilonModel,
    y_tau,
    f_p_x,
    x_raw,
    f_q_x,
    tau: int,
) -> np.ndarray:
    """The prediction of y_0 that the model implies at step tau."""
    y_tau = _labels(cfg, y_tau, "y_tau")
    tau = int(cfg.schedule.check_timesteps(tau))
    f_q = cfg.f_q(f_q_x, y_tau.shape[0])
    eps_hat = model.predict(y_tau, f_p_x, x_raw, tau)
    return _denoise(cfg.schedule, y_tau, f_q, tau, eps_hat)


def _ddim_update(schedule, y_tau, f_q, tau_s, tau_prev, eps_hat):
    y0_hat = _denoise(schedule, y_tau, f_q, tau_s, eps_hat)
    signal, noise = _coefficients(schedule, tau_prev)
    return signal * y0_hat + (1.0 - signal) * f_q + noise * eps_hat


def ddim_step(
    cfg: DiffusionConfig,
    model: EpsilonModel,
    y_tau_s,
    f_p_x,
    x_raw,
    f_q_x,
    tau_s: int,
    tau_prev: int,
) -> np.ndarray:
    """One deterministic (sigma=0) step from tau_s to the earlier tau_prev."""
    if not 1 <= tau_prev < tau_s:
        raise TrajectoryError(f"Can't step from tau={tau_s} to tau={tau_prev}")

    cfg.schedule.check_timesteps([tau_s, tau_prev])
    y_tau_s = _labels(cfg, y_tau_s, "y_tau")
    f_q = cfg.f_q(f_q_x, y_tau_s.shape[0])
    eps_hat = model.predict(y_tau_s, f_p_x, x_raw, tau_s)
    return _ddim_update(cfg.schedule, y_tau_s, f_q, tau_s, tau_prev, eps_hat)


def ddim_sample(
    cfg: DiffusionConfig,
    model: EpsilonModel,
    y_T,
    f_p_x,
    x_raw,
    f_q_x,
    trajectory: Optional[Trajectory] = None,
) -> np.ndarray:
    """Run the deterministic reverse process from y_T down to y_0.

    After the last step, which ends in tau_1, the denoised label at tau_1 is the
    result.
    """
    trajectory = trajectory or cfg.trajectory
    if trajectory.tau[-1] > cfg.T:
        raise TrajectoryError(f"Trajectory {trajectory.tau} exceeds T={cfg.T}")

    y = _labels(cfg, y_T, "y_T")
    f_q = cfg.f_q(f_q_x, y.shape[0])
    for tau_s, tau_prev in trajectory.reverse_pairs():
        eps_hat = model.predict(y, f_p_x, x_raw, tau_s)
        y = _ddim_update(cfg.schedule, y, f_q, tau_s, tau_prev, eps_hat)

    tau_1 = trajectory.tau[0]
    eps_hat = model.predict(y, f_p_x, x_raw, tau_1)
    return _denoise(cfg.schedule, y, f_q, tau_1, eps_hat)


def posterior_sigmas(schedule: NoiseSchedule, eta: float = 1.0) -> np.ndarray:
    """sigma_t = sqrt(eta * posterior variance), eta=1 is the markovian case."""
    return np.sqrt(eta * schedule.posterior_var)


def generalized_nonmarkovian_sample(
    cfg: DiffusionConfig,
    y0,
    f_q_x,
    sigma: Sequence[float],
    rng: np.random.Generator,
) -> np.ndarray:
    """Sample whole paths of the non-markovian forward process.

    Parameters
    ----------
    sigma
        sigma_t for t = 1..T, each with sigma_t^2 <= 1 - alpha_bar(t-1)

    Returns
    -------
    (T, B, n_classes) array, entry t - 1 holds y_t
    """
    schedule = cfg.schedule
    T = schedule.T
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.shape != (T,):
        raise DimensionError("sigma", (T,), sigma.shape)

    alpha_bar_prev = schedule.alpha_bar_at(np.arange(0, T))
    for t in range(1, T + 1):
        sigma_squared = sigma[t - 1] ** 2
        bound = 1.0 - alpha_bar_prev[t - 1]
        if sigma[t - 1] < 0 or sigma_squared > bound + SIGMA_TOLERANCE:
            raise SigmaConstraintError(t, sigma_squared, bound)

    y0 = _labels(cfg, y0, "y_0")
    f_q = cfg.f_q(f_q_x, y0.shape[0])

    path = np.empty((T,) + y0.shape)
    signal, noise = _coefficients(schedule, T)
    path[T - 1] = signal * y0 + (1.0 - signal) * f_q + noise * rng.standard_normal(
        y0.shape
    )

    for t in range(T, 1, -1):
        signal, noise = _coefficients(schedule, t)
        eps_tilde = (path[t - 1] - signal * y0 - (1.0 - signal) * f_q) / noise

        signal_prev, _ = _coefficients(schedule, t - 1)
        sigma_t = sigma[t - 1]
        direction = np.sqrt(max(1.0 - alpha_bar_prev[t - 1] - sigma_t**2, 0.0))
        mean = signal_prev * y0 + (1.0 - signal_prev) * f_q + direction * eps_tilde
        path[t - 2] = mean + sigma_t * rng.standard_normal(y0.shape)

    return path


def _chunks(n: int, chunk_size: int):
    if n == 0:
        raise EmptyDatasetError("The inference input")
    return chunk_slices(n, chunk_size)


def _take(values, chunk: slice):
    return None if values is None else values[chunk]


def mle_infer(
    cfg: DiffusionConfig,
    model: EpsilonModel,
    f_p_x,
    x_raw=None,
    f_q_x=None,
    chunk_size: int = 1024,
    threads: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Classify by running DDIM from the latent mean y_T = f_q(x).

    Returns the classes, the lowest index wins ties, and the denoised labels.
    """
    f_p_x = np.atleast_2d(np.asarray(f_p_x, dtype=np.float64))
    n = f_p_x.shape[0]
    x_raw = _rows(x_raw, n, "x")
    f_q = cfg.f_q(f_q_x, n)
    trajectory = cfg.trajectory

    def run(chunk: slice) -> np.ndarray:
        return ddim_sample(
            cfg,
            model,
            f_q[chunk],
            f_p_x[chunk],
            _take(x_raw, chunk),
            f_q[chunk],
            trajectory,
        )

    chunks = _chunks(n, chunk_size)
    y0_hat = np.concatenate(parallel_map(run, chunks, threads), axis=0)
    logger.debug("Inferred %d labels along %s", n, trajectory.tau)
    return argmax_rows(y0_hat), y0_hat


def vote_distribution(
    cfg: DiffusionConfig,
    model: EpsilonModel,
    f_p_x,
    x_raw=None,
    f_q_x=None,
    n_samples: int = 25,
    rng: Optional[np.random.Generator] = None,
    chunk_size: int = 1024,
    threads: int = 1,
) -> np.ndarray:
    """Fraction of generated labels per class, from y_T ~ N(f_q(x), I).

    Only y_T is random, each draw runs the deterministic reverse process.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples has to be positive, got {n_samples}")
    if rng is None:
        raise ValueError("vote inference needs a random generator")

    f_p_x = np.atleast_2d(np.asarray(f_p_x, dtype=np.float64))
    n = f_p_x.shape[0]
    x_raw = _rows(x_raw, n, "x")
    f_q = cfg.f_q(f_q_x, n)
    trajectory = cfg.trajectory

    # drawn up front, the result is independent of threads and chunks
    noise = rng.standard_normal((n_samples, n, cfg.n_classes))

    jobs = [(sample, chunk) for sample in range(n_samples) for chunk in _chunks(n, chunk_size)]

    def run(job) -> np.ndarray:
        sample, chunk = job
        y0_hat = ddim_sample(
            cfg,
            model,
            f_q[chunk] + noise[sample, chunk],
            f_p_x[chunk],
            _take(x_raw, chunk),
            f_q[chunk],
            trajectory,
        )
        return argmax_rows(y0_hat)

    results = parallel_map(run, jobs, threads)

    counts = np.zeros((n, cfg.n_classes))
    for (sample, chunk), classes in zip(jobs, results):
        rows = np.arange(chunk.start, chunk.stop)
        np.add.at(counts, (rows, classes), 1)

    return counts / n_samples


def vote_infer(
    cfg: DiffusionConfig,
    model: EpsilonModel,
    f_p_x,
    x_raw=None,
    f_q_x=None,
    n_samples: int = 25,
    rng: Optional[np.random.Generator] = None,
    chunk_size: int = 1024,
    threads: int = 1,
) -> np.ndarray:
    """Majority vote over n_samples generated labels, the lowest class wins ties."""
    distribution = vote_distribution(
        cfg, model, f_p_x, x_raw, f_q_x, n_samples, rng, chunk_size, threads
    )
    return argmax_rows(distribution)
