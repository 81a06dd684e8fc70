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


"""Training on targets retrieved from the neighborhood of each point."""

import math
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from labeldiffusion.configs.architecture import Architecture
from labeldiffusion.configs.diffusion_config import DiffusionConfig
from labeldiffusion.configs.training import TargetMode, TrainConfig
from labeldiffusion.datastore.formats import read_candidates, write_candidates
from labeldiffusion.diffusion.denoiser import DenoiserModel, init_from_architecture
from labeldiffusion.diffusion.optimizer import (
    OptimizerState,
    adam_step,
    init_optimizer,
    lr_at,
)
from labeldiffusion.diffusion.sampler import training_loss
from labeldiffusion.diffusion.schedule import linear_beta_schedule
from labeldiffusion.evalharness import candidate_clean_fraction
from labeldiffusion.exceptions import DimensionError, DivergenceError, EmptyDatasetError
from labeldiffusion.logger import logger
from labeldiffusion.paths import PathLike
from labeldiffusion.retrieval import build_index, candidate_table, mean_targets, sample_targets
from labeldiffusion.utils import as_batch, check_labels, chunk_slices, spawn_rngs


@dataclass
class EpochStats:
    epoch: int
    loss: float
    lr: float
    # share of the drawn targets that equal the clean label, if it is known
    target_clean: Optional[float] = None


@dataclass
class TrainResult:
    model: DenoiserModel
    optimizer: OptimizerState
    diffusion: DiffusionConfig
    candidates: np.ndarray
    history: List[EpochStats] = field(default_factory=list)
    candidate_clean: Optional[float] = None

    @property
    def final_loss(self) -> float:
        return self.history[-1].loss


class Trainer:
    """Fits a denoiser to labels drawn from {y, y(1), ..., y(k)} of every point.

    Randomness comes from independent child streams of config.seed, one for
    shuffling, one for the targets and one for t and eps.
    """

    def __init__(
        self,
        config: TrainConfig,
        features,
        labels,
        n_classes: int,
        raw=None,
        f_q=None,
        clean_labels=None,
        candidates_path: Optional[PathLike] = None,
    ):
        self.config = config
        self.features = np.atleast_2d(np.asarray(features, dtype=np.float64))
        n = self.features.shape[0]
        if n == 0:
            raise EmptyDatasetError("The training set")

        self.labels = np.asarray(labels, dtype=np.int64)
        if self.labels.shape != (n,):
            raise DimensionError("labels", (n,), self.labels.shape)
        check_labels(self.labels, n_classes)
        self.n_classes = n_classes

        self.raw = None if raw is None else np.atleast_2d(np.asarray(raw, dtype=np.float64))
        if self.raw is not None and self.raw.shape[0] != n:
            raise DimensionError("raw input rows", n, self.raw.shape[0])

        self.f_q = None if f_q is None else as_batch(f_q, n_classes, "f_q(x)")

        self.clean_labels = None
        if clean_labels is not None:
            self.clean_labels = np.asarray(clean_labels, dtype=np.int64)
            if self.clean_labels.shape != (n,):
                raise DimensionError("clean labels", (n,), self.clean_labels.shape)

        self.candidates_path = candidates_path

        self.diffusion = DiffusionConfig(
            schedule=linear_beta_schedule(config.T, config.beta_start, config.beta_end),
            S=config.S,
            f_q_mode=config.f_q_mode,
            n_classes=n_classes,
        )
        self.architecture = Architecture(
            n_classes=n_classes,
            feat_dim=self.features.shape[1],
            raw_dim=0 if self.raw is None else self.raw.shape[1],
            hidden=config.hidden,
            time_embed_dim=config.time_embed_dim,
            n_blocks=config.n_blocks,
            num_timesteps=config.T,
        )

    def _build_candidates(self) -> np.ndarray:
        path = self.candidates_path
        n = self.features.shape[0]
        if path is not None and os.path.exists(path):
            table = read_candidates(path)
            if table.shape != (n, self.config.k + 1):
                raise DimensionError(
                    f'candidates in "{path}"', (n, self.config.k + 1), table.shape
                )
            if not np.array_equal(table[:, 0], self.labels):
                raise DimensionError(
                    f'anchors in "{path}"', "the training labels", "other labels"
                )
            logger.info('Using the cached candidates of "%s"', path)
            return table

        index = build_index(self.features, self.labels, self.config.metric)
        table = candidate_table(index, self.config.k, self.config.threads)
        if path is not None:
            write_candidates(path, table)
        return table

    def _batches(self, rng: np.random.Generator) -> List[np.ndarray]:
        n = self.features.shape[0]
        order = rng.permutation(n)
        batches = [order[chunk] for chunk in chunk_slices(n, self.config.batch_size)]
        if len(batches) > 1 and batches[-1].size == 1:
            # a single row has no batch statistics
            batches.pop()
        return batches

    def _targets(self, table: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        if self.config.target_mode == TargetMode.MEAN:
            return mean_targets(table, self.n_classes)
        return sample_targets(table, self.n_classes, rng)

    def run(self) -> TrainResult:
        config = self.config
        table = self._build_candidates()

        candidate_clean = None
        if self.clean_labels is not None:
            candidate_clean = candidate_clean_fraction(table, self.clean_labels)
            logger.info("candidate_clean_fraction=%.6g", candidate_clean)

        model = init_from_architecture(self.architecture, config.seed)
        optimizer = init_optimizer(model, config.lr, config.warmup_epochs, config.epochs)
        shuffle_rng, target_rng, noise_rng = spawn_rngs(config.seed, 3)

        logger.info(
            "Training %s on %d points, k=%d, target_mode=%s",
            self.architecture,
            self.features.shape[0],
            config.k,
            TargetMode(config.target_mode).value,
        )

        history: List[EpochStats] = []
        for epoch in range(config.epochs):
            batches = self._batches(shuffle_rng)
            loss_sum = 0.0
            seen = 0
            clean_sum = 0.0
            for step, batch in enumerate(batches):
                lr = lr_at(epoch + step / len(batches), optimizer)
                targets = self._targets(table[batch], target_rng)
                result = training_loss(
                    self.diffusion,
                    model,
                    targets,
                    self.features[batch],
                    None if self.raw is None else self.raw[batch],
                    None if self.f_q is None else self.f_q[batch],
                    noise_rng,
                )
                if not math.isfinite(result.loss):
                    raise DivergenceError("the loss", optimizer.step_count)

                gradients = model.backward(result.output_grad)
                adam_step(model, optimizer, gradients, lr)

                loss_sum += result.loss * batch.size
                seen += batch.size
                if self.clean_labels is not None:
                    clean = self.clean_labels[batch]
                    clean_sum += float(targets[np.arange(batch.size), clean].sum())

            stats = EpochStats(
                epoch=epoch,
                loss=loss_sum / seen,
                lr=lr_at(epoch, optimizer),
                target_clean=clean_sum / seen if self.clean_labels is not None else None,
            )
            history.append(stats)

            metrics = dict(loss=stats.loss, lr=stats.lr)
            if stats.target_clean is not None:
                metrics["target_clean"] = stats.target_clean
            logger.progress("epoch", epoch, config.epochs, **metrics)

        return TrainResult(
            model=model,
            optimizer=optimizer,
            diffusion=self.diffusion,
            candidates=table,
            history=history,
            candidate_clean=candidate_clean,
        )


def train(config: TrainConfig, features, labels, n_classes: int, **kwargs) -> TrainResult:
    """Shortcut for Trainer(...).run()."""
    return Trainer(config, features, labels, n_classes, **kwargs).run()
