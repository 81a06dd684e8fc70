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

"""Utility functions."""

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

from labeldiffusion.exceptions import DimensionError, LabelRangeError

T = TypeVar("T")
R = TypeVar("R")

# seeds are accepted as any 64 bit value, including negative ones
SEED_MASK = 2**64 - 1


def seed_sequence(seed: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed) & SEED_MASK)


def make_rng(seed: int) -> np.random.Generator:
    """A generator that only depends on the seed."""
    return np.random.default_rng(seed_sequence(seed))


def spawn_rngs(seed: int, count: int) -> List[np.random.Generator]:
    """Independent child streams of one seed, always in the same order."""
    return [np.random.default_rng(child) for child in seed_sequence(seed).spawn(count)]


def one_hot(labels, n_classes: int) -> np.ndarray:
    """Convert class ids to one-hot rows."""
    labels = np.asarray(labels, dtype=np.int64)
    check_labels(labels, n_classes)
    result = np.zeros((labels.shape[0], n_classes))
    result[np.arange(labels.shape[0]), labels] = 1.0
    return result


def check_labels(labels: np.ndarray, n_classes: int):
    """Raise if a class id is negative or not below n_classes."""
    if labels.size == 0:
        return

    bad = (labels < 0) | (labels >= n_classes)
    if bad.any():
        raise LabelRangeError(int(labels[np.argmax(bad)]), n_classes)


def as_batch(values, width: int, what: str) -> np.ndarray:
    """Make a 2D float64 batch out of a vector or a matrix and check its width.

    A single vector becomes a batch of one row.
    """
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array[np.newaxis, :]

    if array.ndim != 2 or array.shape[1] != width:
        raise DimensionError(what, f"(batch, {width})", array.shape)

    return array


def chunk_slices(n: int, chunk_size: int) -> List[slice]:
    """Split range(n) into consecutive slices of at most chunk_size."""
    return [slice(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]


def parallel_map(
    func: Callable[[T], R],
    items: Iterable[T],
    threads: Optional[int] = 1,
) -> List[R]:
    """Apply func to every item, keeping the order of the results.

    numpy releases the GIL for most of the heavy lifting, so threads are enough.
    """
    items = list(items)
    if not threads or threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]

    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as executor:
        return list(executor.map(func, items))


def majority_vote(votes: np.ndarray, n_classes: int) -> np.ndarray:
    """Most frequent class per row, the lowest class id wins ties.

    Parameters
    ----------
    votes
        (rows, voters) class ids
    """
    votes = np.asarray(votes, dtype=np.int64)
    counts = np.zeros((votes.shape[0], n_classes), dtype=np.int64)
    rows = np.repeat(np.arange(votes.shape[0]), votes.shape[1])
    np.add.at(counts, (rows, votes.ravel()), 1)
    # np.argmax returns the first maximum
    return np.argmax(counts, axis=1)


def argmax_rows(values: Sequence) -> np.ndarray:
    """Index of the largest entry per row, the lowest index wins ties."""
    return np.argmax(np.atleast_2d(values), axis=1)
