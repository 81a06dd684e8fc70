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


"""key=value text files that describe generated datasets and label noise."""

from collections import OrderedDict
from typing import Dict, Mapping

from labeldiffusion.datastore.blobs import BlobSpec
from labeldiffusion.exceptions import CorruptFileError
from labeldiffusion.logger import format_value, logger
from labeldiffusion.paths import (
    MANIFEST_SUFFIX,
    PROVENANCE_SUFFIX,
    PathLike,
    prepare_output,
    sidecar_path,
)


def write_key_values(path: PathLike, entries: Mapping):
    path = prepare_output(path)
    with open(path, "w") as file:
        for key, value in entries.items():
            if "=" in str(key) or "\n" in str(key) + str(value):
                raise ValueError(f"Can't store {key}={value} as a single line")
            file.write(f"{key}={format_value(value)}\n")

    logger.debug('Wrote "%s"', path)


def read_key_values(path: PathLike) -> Dict[str, str]:
    entries: Dict[str, str] = OrderedDict()
    with open(path, "r") as file:
        for number, line in enumerate(file, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue

            if "=" not in line:
                raise CorruptFileError(path, f'Line {number} "{line}" is not key=value')

            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()

    return entries


def _format_means(spec: BlobSpec) -> str:
    # full precision, the means are read back to rebuild the posterior
    return ";".join(",".join(repr(float(v)) for v in mean) for mean in spec.means)


def write_manifest(features_path: PathLike, spec: BlobSpec, **extra):
    """Store the parameters of a synthetic dataset next to its features."""
    entries = OrderedDict(
        generator="blobs",
        n_classes=spec.n_classes,
        per_class=spec.per_class,
        dim=spec.dim,
        sigma=repr(float(spec.sigma)),
        seed=spec.seed,
        means=_format_means(spec),
    )
    entries.update(extra)
    write_key_values(sidecar_path(features_path, MANIFEST_SUFFIX), entries)


def read_manifest(path: PathLike) -> BlobSpec:
    """Rebuild the BlobSpec of a manifest file."""
    entries = read_key_values(path)
    if entries.get("generator") != "blobs":
        raise CorruptFileError(path, f'Unknown generator "{entries.get("generator")}"')

    try:
        means = [
            [float(value) for value in mean.split(",")]
            for mean in entries["means"].split(";")
        ]
        return BlobSpec(
            n_classes=int(entries["n_classes"]),
            per_class=int(entries["per_class"]),
            means=means,
            sigma=float(entries["sigma"]),
            seed=int(entries["seed"]),
        )
    except (KeyError, ValueError) as error:
        raise CorruptFileError(path, f"Invalid manifest: {error}") from error


def write_provenance(labels_path: PathLike, **entries):
    """Record how a label file was generated."""
    write_key_values(sidecar_path(labels_path, PROVENANCE_SUFFIX), entries)
