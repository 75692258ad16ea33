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

import logging
import shutil
import tempfile

import numpy as np

from ..common import Ablation, AttributedGraph, ModelWidths, TrainConfig
from ..graph import generate_sbm

log = logging.getLogger(__name__)

__all__ = [
    'TINY_WIDTHS',
    'assert_graphs_equal',
    'make_tempdir',
    'path_graph',
    'random_stochastic',
    'small_sbm',
    'tiny_config',
    'triangle_graph',
]

TINY_WIDTHS = ModelWidths(hidden=8, embed=8, proj_hidden=8, proj_out=4, cluster_hidden=8)


def path_graph(n, attr_dim=2, labels=None):
    """
    Nodes ``0 - 1 - ... - n-1`` with attributes ``X[i, j] = i + j``.
    """
    attributes = np.add.outer(np.arange(n, dtype=np.float64), np.arange(attr_dim, dtype=np.float64))
    return AttributedGraph.from_edges(attributes, [(i, i + 1) for i in range(n - 1)], labels)


def triangle_graph(attributes=None):
    if attributes is None:
        attributes = np.ones((3, 2))
    return AttributedGraph.from_edges(attributes, [(0, 1), (1, 2), (0, 2)])


def small_sbm(seed=0, n=24, k=2):
    """
    A small, well separated attributed SBM for fast training tests.
    """
    return generate_sbm(n, k, p_in=0.5, p_out=0.05, attr_dim=4, separation=4.0, noise_sd=0.5, seed=seed)


def tiny_config(k=2, **overrides):
    """
    A `TrainConfig` with tiny widths and few steps.
    """
    fields = dict(k=k, widths=TINY_WIDTHS, pretrain_steps=3, t_max=6, label_refresh_period=2, lr=1e-2, pretrain_lr=1e-2)
    if 'ablation' in overrides and isinstance(overrides['ablation'], dict):
        overrides['ablation'] = Ablation(**overrides['ablation'])
    fields.update(overrides)
    return TrainConfig(**fields)


def random_stochastic(rng, n, k):
    """
    An ``(n, k)`` matrix with strictly positive rows summing to 1.
    """
    raw = rng.random((n, k)) + 0.05
    return raw / raw.sum(axis=1, keepdims=True)


def assert_graphs_equal(testcase, expected, actual):
    testcase.assertEqual(expected.n_nodes, actual.n_nodes)
    testcase.assertEqual(expected.attr_dim, actual.attr_dim)
    np.testing.assert_array_equal(expected.attributes, actual.attributes)
    np.testing.assert_array_equal(expected.edges, actual.edges)
    if expected.true_labels is None:
        testcase.assertIsNone(actual.true_labels)
    else:
        np.testing.assert_array_equal(expected.true_labels, actual.true_labels)


def make_tempdir(testcase):
    """
    Create a scratch directory removed when *testcase* finishes.
    """
    path = tempfile.mkdtemp(prefix='agclust-test-')
    testcase.addCleanup(shutil.rmtree, path, ignore_errors=True)
    return path
