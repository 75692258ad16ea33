# -*- coding: utf-8 -*-
# Copyright 2026 agclust contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""
Capture the records a logger emits during a block::

    with capture_logging(logging.getLogger('agclust.trainer')) as records:
        trainer.step()

    assert any(r.levelno == logging.INFO for r in records)
"""

import logging
import unittest
from contextlib import contextmanager


class _CaptureHandler(logging.Handler):
    """
    :ivar list records: Every `logging.LogRecord` emitted to this handler.
    """
    def __init__(self):
        super(_CaptureHandler, self).__init__()
        self.records = []

    def emit(self, record):
        self.records.append(record)


@contextmanager
def capture_logging(logger, level=logging.DEBUG):
    """
    Collect the records of *logger* while the block runs.

    Propagation is switched off and the logger level set to *level* for
    the duration, then both are restored.

    :returns: `list` of `logging.LogRecord`
    """
    handler = _CaptureHandler()
    was_propagating = logger.propagate
    was_level = logger.level
    logger.propagate = False
    logger.setLevel(level)
    logger.addHandler(handler)
    try:
        yield handler.records
    finally:
        logger.removeHandler(handler)
        logger.propagate = was_propagating
        logger.setLevel(was_level)


class CaptureLoggingTests(unittest.TestCase):
    """Test :func:`capture_logging()`"""

    logger = logging.getLogger(__name__).getChild('CaptureLoggingTests')

    def test_capture(self):
        """
        Records accumulate in emission order, with their lazy arguments.
        """
        with capture_logging(self.logger) as records:
            self.logger.info("step %d", 3)
            self.logger.debug("done")

        [r1, r2] = records
        self.assertEqual("step 3", r1.getMessage())
        self.assertEqual("done", r2.msg)

    def test_restores_logger(self):
        """
        Propagation and level are changed inside the block and restored after.
        """
        self.logger.propagate = True

        with capture_logging(self.logger, logging.ERROR):
            self.assertFalse(self.logger.propagate)
            self.assertEqual(logging.ERROR, self.logger.level)

        self.assertTrue(self.logger.propagate)
        self.assertEqual(logging.NOTSET, self.logger.level)
