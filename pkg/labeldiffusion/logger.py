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

"""Logging setup for label-diffusion."""

import logging
import os
import sys
from datetime import datetime
from typing import Dict, Optional, cast

try:
    from labeldiffusion.commit_hash import COMMIT_HASH
except ImportError:
    COMMIT_HASH = ""

VERSION = "1.0.0"

previous_progress_log: Optional[str] = None


def format_value(value) -> str:
    """Render a metric for key=value lines."""
    if isinstance(value, float):
        return f"{value:.6g}"

    return str(value)


def format_metrics(**metrics) -> str:
    """Join metrics into a single 'key=value key=value' string."""
    return " ".join(f"{key}={format_value(value)}" for key, value in metrics.items())


class Logger(logging.Logger):
    def progress(self, stage: str, step: int, total: int, **metrics):
        """Log one line of progress, for example a finished training epoch.

        Parameters
        ----------
        stage
            what is progressing, e.g. "epoch" or "chunk"
        step
            zero based index of the finished step
        total
            number of steps the stage will have
        """
        # pylint: disable=protected-access
        if not self.isEnabledFor(logging.INFO):
            return

        global previous_progress_log

        msg = f"{stage} {step + 1}/{total}"
        if metrics:
            msg = f"{msg} {format_metrics(**metrics)}"

        if msg == previous_progress_log:
            # chunks of identical size and content would otherwise repeat
            return

        previous_progress_log = msg

        self._log(logging.INFO, msg, args=None)


# https://github.com/python/typeshed/issues/1801
logging.setLoggerClass(Logger)
logger = cast(Logger, logging.getLogger("label-diffusion"))


def is_debug() -> bool:
    """True, if the logger is currently in DEBUG mode."""
    return logger.level <= logging.DEBUG


class ColorfulFormatter(logging.Formatter):
    """Formatter that prints short logs normally and detailed logs for debugging.

    In debug mode every source file gets its own color, and the time, pid,
    file and line number are added. Otherwise INFO logs are printed as they are
    and only warnings and errors get a colored level name.
    """

    level_based_colors = {
        logging.DEBUG: 8,
        logging.INFO: 7,
        logging.WARNING: 11,
        logging.ERROR: 9,
        logging.FATAL: 9,
    }

    def __init__(self):
        super().__init__()
        self.file_color_mapping: Dict[str, int] = {}

        # 8bit ansi codes of the 6x6x6 color cube that read well on dark
        # terminals and can't be confused with the red of errors
        self.allowed_colors = [
            16 + b + 6 * g + 36 * r
            for r in range(6)
            for g in range(6)
            for b in range(6)
            if 0.2126 * r + 0.7152 * g + 0.0722 * b >= 1 and g + b > 1
        ]

    def _word_to_color(self, word: str) -> int:
        index = sum(ord(char) for char in word) % len(self.allowed_colors)
        return self.allowed_colors[index]

    def _file_color(self, record: logging.LogRecord) -> int:
        if record.filename not in self.file_color_mapping:
            self.file_color_mapping[record.filename] = self._word_to_color(
                record.filename
            )

        return self.file_color_mapping[record.filename]

    def _get_format(self, record: logging.LogRecord) -> str:
        if not is_debug():
            if record.levelno <= logging.INFO:
                return "%(message)s"

            color = self.level_based_colors[record.levelno]
            return f"\033[38;5;{color}m%(levelname)s\033[0m: %(message)s"

        color = self._file_color(record)
        if record.levelno >= logging.WARNING:
            # underline
            style = f"\033[4;38;5;{color}m"
        else:
            style = f"\033[38;5;{color}m"

        return (
            f'{datetime.now().strftime("%H:%M:%S.%f")} '
            f"{os.getpid()} "
            f"{style}"
            "%(levelname)s "
            "%(filename)s:%(lineno)d: "
            "%(message)s"
            "\033[0m"
        )

    def format(self, record: logging.LogRecord) -> str:
        # pylint: disable=protected-access
        self._style._fmt = self._get_format(record)
        return super().format(record)


class _MaxLevelFilter(logging.Filter):
    """Let only records below a level pass."""

    def __init__(self, level: int):
        super().__init__()
        self.level = level

    def filter(self, record: logging.LogRecord) -> bool:
        return record.levelno < self.level


# progress and results are regular output, problems go to stderr
stdout_handler = logging.StreamHandler(sys.stdout)
stdout_handler.addFilter(_MaxLevelFilter(logging.WARNING))
stdout_handler.setFormatter(ColorfulFormatter())

stderr_handler = logging.StreamHandler(sys.stderr)
stderr_handler.setLevel(logging.WARNING)
stderr_handler.setFormatter(ColorfulFormatter())

logger.addHandler(stdout_handler)
logger.addHandler(stderr_handler)
logger.setLevel(logging.INFO)
logger.propagate = False


def log_info(name: str = "label-diffusion"):
    """Log version and name to the console."""
    logger.info("%s %s %s", name, VERSION, COMMIT_HASH)

    # pylint: disable=import-outside-toplevel
    import numpy
    import pandas
    import pydantic
    import scipy

    logger.info(
        "numpy %s, scipy %s, pandas %s, pydantic %s",
        numpy.__version__,
        scipy.__version__,
        pandas.__version__,
        pydantic.VERSION,
    )


def update_verbosity(debug: bool):
    """Set the logging verbosity."""
    if debug:
        logger.setLevel(logging.DEBUG)
        logger.debug("Debug output enabled")
    else:
        logger.setLevel(logging.INFO)
