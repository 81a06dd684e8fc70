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



import os
import re
from setuptools import setup
from setuptools.command.install import install

PACKAGE = "labeldiffusion"


class Install(install):
    """Store the commit hash, so that it shows up in the debug output."""

    def run(self):
        try:
            commit = os.popen("git rev-parse HEAD").read().strip()
            if re.fullmatch(r"[0-9a-f]+", commit):
                # depending on the system the package is built in build/lib first
                target = os.path.join(PACKAGE, "commit_hash.py")
                if os.path.exists(os.path.join("build", "lib", PACKAGE)):
                    target = os.path.join("build", "lib", target)
                with open(target, "w+") as f:
                    f.write(f"COMMIT_HASH = '{commit}'\n")
        except Exception as e:
            print("Failed to save the commit hash:", e)

        install.run(self)


def get_packages(base=PACKAGE):
    """All python packages below base, e.g. 'labeldiffusion.diffusion'."""
    packages = []
    for directory, subdirectories, files in os.walk(base):
        subdirectories[:] = [name for name in subdirectories if name != "__pycache__"]
        if "__init__.py" in files:
            packages.append(directory.replace(os.sep, "."))

    return sorted(packages)


setup(
    name="label-diffusion",
    version="1.0.0",
    description="Classifiers from noisy labels via conditional label diffusion",
    license="GPL-3.0",
    packages=get_packages(),
    include_package_data=True,
    scripts=["bin/label-diffusion"],
    python_requires=">=3.8",
    install_requires=["setuptools", "pydantic", "numpy", "scipy", "pandas"],
    cmdclass={
        "install": Install,
    },
)
