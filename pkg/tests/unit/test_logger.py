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


from tests.lib.cleanup import quick_cleanup
from tests.lib.tmp import tmp

import logging
import os
import unittest

from labeldiffusion import logger as logger_module
from labeldiffusion.logger import (
    ColorfulFormatter,
    format_metrics,
    format_value,
    log_info,
    logger,
    update_verbosity,
)


def add_filehandler(log_path):
    """Start logging to a file."""
    os.makedirs(os.path.dirname(log_path), exist_ok=True)
    file_handler = logging.FileHandler(log_path)
    file_handler.setFormatter(ColorfulFormatter())
    logger.addHandler(file_handler)
    return file_handler


class TestLogger(unittest.TestCase):
    def setUp(self):
        self.path = os.path.join(tmp, "logger-test", "log")
        self.handler = add_filehandler(self.path)

    def tearDown(self):
        logger.removeHandler(self.handler)
        self.handler.close()
        quick_cleanup()

    def read(self):
        self.handler.flush()
        with open(self.path, "r") as file:
            return file.read()

    def test_log_info(self):
        update_verbosity(debug=False)
        log_info()
        content = self.read().lower()
        self.assertIn("label-diffusion", content)
        self.assertIn("numpy", content)
        self.assertIn("pandas", content)
        self.assertIn("pydantic", content)

    def test_progress(self):
        update_verbosity(debug=False)
        logger.progress("epoch", 0, 3, loss=0.123456789, lr=0.001)
        logger.progress("epoch", 0, 3, loss=0.123456789, lr=0.001)
        logger.progress("epoch", 1, 3, loss=0.1)
        content = self.read()
        self.assertEqual(content.count("epoch 1/3 loss=0.123457 lr=0.001"), 1)
        self.assertIn("epoch 2/3 loss=0.1", content)
        self.assertEqual(logger_module.previous_progress_log, "epoch 2/3 loss=0.1")

    def test_progress_is_silent_on_warning_level(self):
        logger.setLevel(logging.WARNING)
        logger.progress("epoch", 0, 1)
        self.assertNotIn("epoch", self.read())

    def test_debug(self):
        update_verbosity(debug=True)
        logger.debug("abc")
        logger.warning("foo")
        content = self.read()
        self.assertIn("DEBUG", content)
        self.assertIn("abc", content)
        self.assertIn("test_logger.py", content)
        self.assertIn("WARNING", content)

    def test_default(self):
        update_verbosity(debug=False)
        logger.debug("abc")
        logger.info("bar")
        logger.error("baz")
        content = self.read()
        self.assertNotIn("abc", content)
        self.assertIn("bar", content)
        self.assertNotIn("INFO", content)
        self.assertIn("ERROR", content)
        self.assertIn("baz", content)


class TestFormatting(unittest.TestCase):
    def test_format_value(self):
        self.assertEqual(format_value(0.5), "0.5")
        self.assertEqual(format_value(1 / 3), "0.333333")
        self.assertEqual(format_value(12), "12")
        self.assertEqual(format_value("mle"), "mle")

    def test_format_metrics(self):
        self.assertEqual(format_metrics(a=1, b=0.25), "a=1 b=0.25")
        self.assertEqual(format_metrics(), "")


if __name__ == "__main__":
    unittest.main()
