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

import os
import unittest

import numpy as np
from scipy import sparse

from agclust import graph
from agclust.common import ArgumentError, AttributedGraph, MalformedGraphError, ParseError

from .testutil import assert_graphs_equal, make_tempdir, path_graph, triangle_graph


class TestLoadGraph(unittest.TestCase):
    def setUp(self):
        self.dir = make_tempdir(self)

    def files(self, edges, attrs, labels=None):
        paths = []
        for name, text in (('edges.txt', edges), ('attrs.csv', attrs), ('labels.txt', labels)):
            if text is None:
                paths.append(None)
                continue
            path = os.path.join(self.dir, name)
            with open(path, 'w', encoding='utf-8') as f:
                f.write(text)
            paths.append(path)
        return paths

    def test_reversed_pair_dedup(self):
        g = graph.load_graph(*self.files('0 1\n1 0\n', '0.5\n1.5\n'))
        self.assertEqual(2, g.n_nodes)
        self.assertEqual(1, g.n_edges)
        self.assertIsNone(g.true_labels)

    def test_self_loop_dropped(self):
        g = graph.load_graph(*self.files('0 0\n', '1.0\n'))
        self.assertEqual(1, g.n_nodes)
        self.assertEqual(0, g.n_edges)

    def test_endpoint_out_of_range(self):
        with self.assertRaises(MalformedGraphError):
            graph.load_graph(*self.files('0 5\n', '1.0\n2.0\n'))

    def test_ragged_attributes(self):
        with self.assertRaises(ParseError):
            graph.load_graph(*self.files('0 1\n', '1.0,2.0\n3.0\n'))

    def test_labels(self):
        g = graph.load_graph(*self.files('0 1\n', '1.0\n2.0\n3.0\n', '0\n1\n1\n'))
        np.testing.assert_array_equal([0, 1, 1], g.true_labels)
        self.assertEqual(2, g.n_clusters)

    def test_label_count_mismatch(self):
        with self.assertRaises(MalformedGraphError):
            graph.load_graph(*self.files('0 1\n', '1.0\n2.0\n', '0\n'))

    def test_missing_file(self):
        with self.assertRaises(OSError):
            graph.load_graph(os.path.join(self.dir, 'nope.txt'), os.path.join(self.dir, 'nope.csv'))


class TestSaveGraph(unittest.TestCase):
    def setUp(self):
        self.dir = make_tempdir(self)

    def test_files_round_trip(self):
        """
        Writing a graph as text files and loading them gives the same graph.
        """
        g = graph.generate_sbm(12, 3, 0.6, 0.1, 3, 2.0, 1.0, seed=4)
        paths = graph.save_graph_files(g, self.dir)
        self.assertEqual({'edges', 'attrs', 'labels'}, set(paths))
        assert_graphs_equal(self, g, graph.load_graph(paths['edges'], paths['attrs'], paths['labels']))

    def test_files_without_labels(self):
        paths = graph.save_graph_files(path_graph(3), self.dir)
        self.assertNotIn('labels', paths)

    def test_json_round_trip(self):
        g = graph.generate_sbm(9, 3, 0.5, 0.2, 4, 1.5, 0.3, seed=11)
        path = os.path.join(self.dir, 'graph.json')
        graph.save_graph(g, path)
        assert_graphs_equal(self, g, graph.load_graph_json(path))

    def test_json_unlabelled(self):
        g = path_graph(4, attr_dim=3)
        path = os.path.join(self.dir, 'graph.json')
        graph.save_graph(g, path)
        assert_graphs_equal(self, g, graph.load_graph_json(path))

    def test_json_bad_document(self):
        """
        A structurally wrong document raises ParseError naming the file.
        """
        path = os.path.join(self.dir, 'graph.json')
        with open(path, 'w', encoding='utf-8') as f:
            f.write('{"format_version": 1, "n": 2}')
        with self.assertRaises(ParseError) as cm:
            graph.load_graph_json(path)
        self.assertEqual(path, cm.exception.path)


class TestSymNormalize(unittest.TestCase):
    def test_edgeless(self):
        g = AttributedGraph.from_edges(np.zeros((3, 1)), [])
        np.testing.assert_allclose(np.eye(3), graph.sym_normalize(g).toarray(), atol=1e-15)

    def test_triangle(self):
        np.testing.assert_allclose(np.full((3, 3), 1.0 / 3.0), graph.sym_normalize(triangle_graph()).toarray())

    def test_single_edge(self):
        g = AttributedGraph.from_edges(np.zeros((2, 1)), [(0, 1)])
        np.testing.assert_allclose(np.full((2, 2), 0.5), graph.sym_normalize(g).toarray())

    def test_accepts_sparse_matrix(self):
        adjacency = sparse.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
        self.assertEqual((2, 2), graph.sym_normalize(adjacency).shape)

    def test_rejects_dense(self):
        with self.assertRaises(ArgumentError):
            graph.sym_normalize(np.eye(2))

    def test_symmetric_and_spectrum(self):
        """
        The operator is symmetric with a non-negative entrywise pattern,
        positive diagonal, and eigenvalues within [-1, 1].
        """
        for seed in range(5):
            g = graph.generate_sbm(12, 2, 0.5, 0.2, 2, 1.0, 1.0, seed=seed)
            a = graph.sym_normalize(g).toarray()
            self.assertTrue(np.max(np.abs(a - a.T)) <= 1e-12)
            self.assertTrue(np.all(a >= 0))
            self.assertTrue(np.all(np.diag(a) > 0))
            eigenvalues = np.linalg.eigvalsh(a)
            self.assertTrue(eigenvalues.min() >= -1 - 1e-12)
            self.assertTrue(eigenvalues.max() <= 1 + 1e-12)


class TestDegreeVector(unittest.TestCase):
    def test_examples(self):
        np.testing.assert_array_equal([2, 2, 2], graph.degree_vector(triangle_graph()))
        np.testing.assert_array_equal([1, 2, 1], graph.degree_vector(path_graph(3)))
        edgeless = AttributedGraph.from_edges(np.zeros((4, 1)), [])
        np.testing.assert_array_equal([0, 0, 0, 0], graph.degree_vector(edgeless))


class TestGenerateSbm(unittest.TestCase):
    def test_disjoint_cliques(self):
        g = graph.generate_sbm(6, 3, 1.0, 0.0, 3, 1.0, 1.0, seed=0)
        np.testing.assert_array_equal([0, 0, 1, 1, 2, 2], g.true_labels)
        np.testing.assert_array_equal([[0, 1], [2, 3], [4, 5]], g.edges)

    def test_deterministic(self):
        a = graph.generate_sbm(30, 3, 0.3, 0.05, 5, 2.0, 1.0, seed=7)
        b = graph.generate_sbm(30, 3, 0.3, 0.05, 5, 2.0, 1.0, seed=7)
        assert_graphs_equal(self, a, b)

    def test_seed_matters(self):
        a = graph.generate_sbm(30, 3, 0.3, 0.05, 5, 2.0, 1.0, seed=7)
        b = graph.generate_sbm(30, 3, 0.3, 0.05, 5, 2.0, 1.0, seed=8)
        self.assertFalse(np.array_equal(a.attributes, b.attributes))

    def test_block_means(self):
        """
        Block means sit *separation* apart.
        """
        g = graph.generate_sbm(600, 2, 0.0, 0.0, 2, 6.0, 0.1, seed=1)
        means = np.array([g.attributes[g.true_labels == b].mean(axis=0) for b in range(2)])
        self.assertAlmostEqual(6.0, np.linalg.norm(means[0] - means[1]), delta=0.05)

    def test_edge_count(self):
        """
        Edge counts stay within five standard deviations of their expectation.
        """
        n, k, p_in, p_out = 60, 3, 0.3, 0.05
        size = n // k
        pairs_in = k * size * (size - 1) // 2
        pairs_out = n * (n - 1) // 2 - pairs_in
        mean = pairs_in * p_in + pairs_out * p_out
        sd = np.sqrt(pairs_in * p_in * (1 - p_in) + pairs_out * p_out * (1 - p_out))
        for seed in range(5):
            g = graph.generate_sbm(n, k, p_in, p_out, 3, 1.0, 1.0, seed=seed)
            self.assertTrue(abs(g.n_edges - mean) <= 5 * sd, (seed, g.n_edges, mean))

    def test_invalid(self):
        for args in ((10, 3, 0.3, 0.02, 3, 5.0, 1.0),
                     (9, 3, 0.1, 0.2, 3, 5.0, 1.0),
                     (9, 3, 0.3, 0.1, 2, 5.0, 1.0),
                     (9, 3, 0.3, 0.1, 3, -1.0, 1.0),
                     (9, 3, 0.3, 0.1, 3, 1.0, 0.0)):
            with self.assertRaises(ArgumentError, msg=repr(args)):
                graph.generate_sbm(*args, seed=0)
