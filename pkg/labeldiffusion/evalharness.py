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


"""Metrics and the kNN baseline."""

import os
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd

from labeldiffusion.exceptions import DimensionError, EmptyDatasetError
from labeldiffusion.logger import format_metrics
from labeldiffusion.paths import PathLike, prepare_output
from labeldiffusion.retrieval import RetrievalIndex, query_batch
from labeldiffusion.utils import majority_vote

DEFAULT_K_CANDIDATES = (1, 5, 10, 20, 50)


def _pair(a, b, what: str) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.int64).ravel()
    b = np.asarray(b, dtype=np.int64).ravel()
    if a.shape != b.shape:
        raise DimensionError(what, a.shape, b.shape)
    if a.shape[0] == 0:
        raise EmptyDatasetError(what)
    return a, b


def accuracy(pred, truth) -> float:
    """Fraction of exact matches."""
    pred, truth = _pair(pred, truth, "predictions and truth")
    return float(np.mean(pred == truth))


def noise_rate(noisy, clean) -> float:
    """Fraction of labels that differ from the clean ones."""
    noisy, clean = _pair(noisy, clean, "noisy and clean labels")
    return float(np.mean(noisy != clean))


def candidate_clean_fraction(table, clean_labels) -> float:
    """Over all entries of all candidate sets, the fraction equal to the
    clean label of the point that the set belongs to."""
    table = np.asarray(table, dtype=np.int64)
    clean_labels = np.asarray(clean_labels, dtype=np.int64)
    if table.ndim != 2 or table.shape[0] != clean_labels.shape[0]:
        raise DimensionError("candidate table", (clean_labels.shape[0], "k + 1"), table.shape)
    if table.size == 0:
        raise EmptyDatasetError("The candidate table")
    return float(np.mean(table == clean_labels[:, np.newaxis]))


def knn_classifier(
    index: RetrievalIndex,
    query_features,
    k: int,
    n_classes: int,
    threads: int = 1,
) -> np.ndarray:
    """Majority label of the k nearest indexed points, the lowest class wins ties."""
    ids, _ = query_batch(index, query_features, k, threads=threads)
    return majority_vote(index.labels[ids], n_classes)


def select_k(
    index: RetrievalIndex,
    val_features,
    val_labels,
    n_classes: int,
    candidates: Sequence[int] = DEFAULT_K_CANDIDATES,
    threads: int = 1,
) -> Tuple[int, Dict[int, float]]:
    """The neighborhood size with the best kNN accuracy on held out data.

    Candidates larger than the index are skipped. Ties go to the smaller k.
    """
    scores: Dict[int, float] = {}
    for k in sorted(set(candidates)):
        if not 1 <= k <= index.size:
            continue
        prediction = knn_classifier(index, val_features, k, n_classes, threads)
        scores[k] = accuracy(prediction, val_labels)

    if not scores:
        raise EmptyDatasetError("The list of usable k candidates")

    best = max(scores, key=lambda k: (scores[k], -k))
    return best, scores


def metrics_line(**metrics) -> str:
    """key=value text of the metrics, as printed by the command line."""
    return format_metrics(**metrics)


def append_metrics(path: PathLike, **metrics):
    """Add a row to a comma separated metrics table with a header.

    New columns are added on demand, missing values stay empty.
    """
    row = pd.DataFrame([metrics])
    if os.path.exists(path):
        row = pd.concat([pd.read_csv(path), row], ignore_index=True)

    row.to_csv(prepare_output(path), index=False)


def read_metrics(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)
