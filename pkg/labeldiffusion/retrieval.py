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


"""Exact nearest neighbors in the feature space and the training targets
that are drawn from the labels of a neighborhood."""

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.spatial.distance import cdist

from labeldiffusion.configs.training import Metric
from labeldiffusion.exceptions import (
    DimensionError,
    EmptyDatasetError,
    NeighborCountError,
    ZeroVectorError,
)
from labeldiffusion.logger import logger
from labeldiffusion.utils import chunk_slices, check_labels, one_hot, parallel_map

# rows of the distance matrix that are held in memory at once
QUERY_CHUNK = 512


@dataclass(frozen=True)
class RetrievalIndex:
    features: np.ndarray
    labels: np.ndarray
    metric: Metric

    @property
    def size(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])


@dataclass(frozen=True)
class CandidateSet:
    """A point's own noisy label and the labels of its k neighbors."""

    anchor_label: int
    neighbor_labels: Tuple[int, ...]

    @property
    def labels(self) -> np.ndarray:
        return np.array((self.anchor_label,) + tuple(self.neighbor_labels), dtype=np.int64)

    @property
    def k(self) -> int:
        return len(self.neighbor_labels)


def _check_nonzero(features: np.ndarray, what: str):
    norms = np.linalg.norm(features, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise ZeroVectorError(what, int(zero[0]))


def build_index(
    features,
    labels,
    metric: Union[Metric, str] = Metric.EUCLIDEAN,
) -> RetrievalIndex:
    """An immutable brute force index over the rows of features."""
    metric = Metric(metric)
    features = np.array(features, dtype=np.float64)
    labels = np.array(labels, dtype=np.int64)
    if features.ndim != 2:
        raise DimensionError("features", "(n, d)", features.shape)

    if features.shape[0] == 0:
        raise EmptyDatasetError("The feature matrix")

    if labels.shape != (features.shape[0],):
        raise DimensionError("labels", (features.shape[0],), labels.shape)

    if metric == Metric.COSINE:
        _check_nonzero(features, "features")

    features.setflags(write=False)
    labels.setflags(write=False)
    logger.debug(
        "Built a %s index over %d points of dimension %d",
        metric.value,
        features.shape[0],
        features.shape[1],
    )
    return RetrievalIndex(features=features, labels=labels, metric=metric)


def _top_k(distances: np.ndarray, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """The k smallest entries sorted by (distance, id)."""
    kth = np.partition(distances, k - 1)[k - 1]
    below = np.flatnonzero(distances < kth)
    # flatnonzero is ascending, so the lowest ids win ties at the boundary
    tied = np.flatnonzero(distances == kth)[: k - below.size]
    chosen = np.concatenate([below, tied])
    order = np.lexsort((chosen, distances[chosen]))
    chosen = chosen[order]
    return chosen, distances[chosen]


def query_batch(
    index: RetrievalIndex,
    queries,
    k: int,
    exclude_ids: Optional[Sequence[int]] = None,
    threads: int = 1,
) -> Tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors of many queries.

    Parameters
    ----------
    exclude_ids
        one id per query that must not be returned, e.g. the query itself

    Returns
    -------
    (m, k) ids and (m, k) distances, sorted nondecreasing with lower ids first
    """
    queries = np.atleast_2d(np.asarray(queries, dtype=np.float64))
    if queries.shape[1] != index.dim:
        raise DimensionError("queries", f"(m, {index.dim})", queries.shape)

    available = index.size - (1 if exclude_ids is not None else 0)
    if not 1 <= k <= available:
        raise NeighborCountError(k, available)

    if exclude_ids is not None:
        exclude_ids = np.asarray(exclude_ids, dtype=np.int64)
        if exclude_ids.shape != (queries.shape[0],):
            raise DimensionError("exclude_ids", (queries.shape[0],), exclude_ids.shape)

    if index.metric == Metric.COSINE:
        _check_nonzero(queries, "queries")

    def run(chunk: slice):
        distances = cdist(queries[chunk], index.features, metric=index.metric.value)
        if exclude_ids is not None:
            rows = np.arange(distances.shape[0])
            distances[rows, exclude_ids[chunk]] = np.inf

        ids = np.empty((distances.shape[0], k), dtype=np.int64)
        values = np.empty((distances.shape[0], k))
        for row, row_distances in enumerate(distances):
            ids[row], values[row] = _top_k(row_distances, k)
        return ids, values

    results = parallel_map(run, chunk_slices(queries.shape[0], QUERY_CHUNK), threads)
    if not results:
        return np.empty((0, k), dtype=np.int64), np.empty((0, k))

    return (
        np.concatenate([ids for ids, _ in results]),
        np.concatenate([values for _, values in results]),
    )


def query_knn(
    index: RetrievalIndex,
    q,
    k: int,
    exclude_id: Optional[int] = None,
) -> List[Tuple[int, float]]:
    """(id, distance) of the k nearest stored points to a single query."""
    exclude = None if exclude_id is None else [exclude_id]
    ids, distances = query_batch(index, np.asarray(q, dtype=np.float64)[np.newaxis], k, exclude)
    return [(int(i), float(d)) for i, d in zip(ids[0], distances[0])]


def candidate_table(index: RetrievalIndex, k: int, threads: int = 1) -> np.ndarray:
    """Candidate labels of every indexed point.

    Column 0 holds the point's own label, columns 1..k the labels of its k
    nearest neighbors, the point itself excluded.
    """
    anchors = index.labels[:, np.newaxis]
    if k == 0:
        return anchors.copy()

    ids, _ = query_batch(
        index,
        index.features,
        k,
        exclude_ids=np.arange(index.size),
        threads=threads,
    )
    return np.concatenate([anchors, index.labels[ids]], axis=1)


def candidate_set(table: np.ndarray, row: int) -> CandidateSet:
    labels = table[row]
    return CandidateSet(int(labels[0]), tuple(int(label) for label in labels[1:]))


def sample_target(
    candidates: CandidateSet,
    n_classes: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """One of the k+1 labels, uniformly drawn, as one-hot."""
    labels = candidates.labels
    return one_hot([labels[rng.integers(labels.size)]], n_classes)[0]


def mean_target(candidates: CandidateSet, n_classes: int) -> np.ndarray:
    """The average of the k+1 one-hot candidates."""
    return mean_targets(candidates.labels[np.newaxis], n_classes)[0]


def sample_targets(
    table: np.ndarray,
    n_classes: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """sample_target for every row of a candidate table at once."""
    table = np.asarray(table, dtype=np.int64)
    columns = rng.integers(table.shape[1], size=table.shape[0])
    return one_hot(table[np.arange(table.shape[0]), columns], n_classes)


def mean_targets(table: np.ndarray, n_classes: int) -> np.ndarray:
    """mean_target for every row of a candidate table at once."""
    table = np.asarray(table, dtype=np.int64)
    check_labels(table, n_classes)
    counts = np.zeros((table.shape[0], n_classes))
    rows = np.repeat(np.arange(table.shape[0]), table.shape[1])
    np.add.at(counts, (rows, table.ravel()), 1.0)
    return counts / table.shape[1]
