# -*- coding: utf-8 -*-
# Copyright 2026 agclust contributors

import unittest

import numpy as np

from agclust import _util as util
from agclust.common import ArgumentError, NumericError, _as_label_vector


class TestUtil(unittest.TestCase):
    def test_derive_seed_deterministic(self):
        self.assertEqual(util._derive_seed(0, 1, 2, 3), util._derive_seed(0, 1, 2, 3))

    def test_derive_seed_position_matters(self):
        seeds = {util._derive_seed(7, phase, step, view)
                 for phase in range(2) for step in range(5) for view in range(2)}
        self.assertEqual(20, len(seeds))

    def test_derive_seed_range(self):
        seed = util._derive_seed(123456789, 1)
        self.assertTrue(0 <= seed < 2 ** 32)

    def test_coerce_label_pair(self):
        pred, truth = util._coerce_label_pair([0, 1, 1], (2.0, 0.0, 1.0))
        self.assertEqual(np.int64, pred.dtype)
        np.testing.assert_array_equal([2, 0, 1], truth)

    def test_coerce_label_pair_length(self):
        """
        Labelings of different lengths are rejected.
        """
        with self.assertRaises(ArgumentError):
            util._coerce_label_pair([0, 1], [0, 1, 1])

    def test_coerce_label_pair_empty(self):
        with self.assertRaises(ArgumentError):
            util._coerce_label_pair([], [])

    def test_label_vector_rejects(self):
        with self.assertRaises(ArgumentError):
            _as_label_vector([0.5, 1.0])
        with self.assertRaises(ArgumentError):
            _as_label_vector([0, -1])
        with self.assertRaises(ArgumentError):
            _as_label_vector([[0, 1]])

    def test_check_finite(self):
        value = np.ones(3)
        self.assertIs(value, util._check_finite('x', value))
        with self.assertRaises(NumericError) as cm:
            util._check_finite('loss', np.array([1.0, np.inf]))
        self.assertEqual('loss is not finite', str(cm.exception))
