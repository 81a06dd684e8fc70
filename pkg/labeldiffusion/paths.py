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

"""Helpers for the files that are read and written."""

import os
import shutil
from typing import Union

from labeldiffusion.logger import logger

PathLike = Union[str, os.PathLike]

MANIFEST_SUFFIX = ".manifest"
PROVENANCE_SUFFIX = ".provenance"


def mkdir(path: PathLike, log: bool = True):
    """Create a folder and all its parents."""
    if path == "" or path is None:
        return

    if os.path.exists(path):
        return

    if log:
        logger.debug('Creating dir "%s"', path)

    os.makedirs(path)


def prepare_output(path: PathLike) -> str:
    """Make sure the directory of a file that is about to be written exists."""
    path = os.fspath(path)
    if path.endswith("/"):
        raise ValueError(f"Expected path to not end with a slash: {path}")

    mkdir(os.path.dirname(path), log=False)
    return path


def sidecar_path(path: PathLike, suffix: str) -> str:
    """The path of a text file that describes the file at path."""
    return f"{os.fspath(path)}{suffix}"


def is_same_file(a: PathLike, b: PathLike) -> bool:
    """Check if two paths point to the same file, even if b doesn't exist yet."""
    return os.path.realpath(a) == os.path.realpath(b)


def remove(path: PathLike):
    """Remove whatever is at the path."""
    if not os.path.exists(path):
        return

    if os.path.isdir(path):
        shutil.rmtree(path)
    else:
        os.remove(path)
