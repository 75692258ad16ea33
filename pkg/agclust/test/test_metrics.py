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

import itertools
import logging
import unittest
from collections import Counter

import numpy as np

from agclust import metrics
from agclust.common import ArgumentError, ContractViolation, DegenerateClusteringError

from .logtools import capture_logging


def brute_ari(pred, truth):
    n11 = n00 = n10 = n01 = 0
    for i, j in itertools.combinations(range(len(pred)), 2):
        same_pred, same_true = pred[i] == pred[j], truth[i] == truth[j]
        if same_pred and same_true:
            n11 += 1
        elif same_pred:
            n10 += 1
        elif same_true:
            n01 += 1
        else:
            n00 += 1
    denominator = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11)
    if denominator == 0:
        return 1.0
    return 2.0 * (n00 * n11 - n01 * n10) / denominator


def _brute_entropy(labels):
    n = float(len(labels))
    return -sum(c / n * np.log(c / n) for c in Counter(labels).values())


def brute_nmi(pred, truth, average='geometric'):
    n = float(len(pred))
    h_pred, h_true = _brute_entropy(pred), _brute_entropy(truth)
    if h_pred == 0 and h_true == 0:
        return 1.0
    if h_pred == 0 or h_true == 0:
        return 0.0
    pred_counts, true_counts = Counter(pred), Counter(truth)
    mutual = 0.0
    for (a, b), c in Counter(zip(pred, truth)).items():
        mutual += c / n * np.log(c * n / (pred_counts[a] * true_counts[b]))
    if average == 'geometric':
        return mutual / np.sqrt(h_pred * h_true)
    return mutual / ((h_pred + h_true) / 2.0)


def brute_acc(pred, truth):
    pred_classes, true_classes = sorted(set(pred)), sorted(set(truth))
    size = max(len(pred_classes), len(true_classes))
    best = 0
    for mapping in itertools.permutations(range(size)):
        target = {p: true_classes[mapping[i]] for i, p in enumerate(pred_classes) if mapping[i] < len(true_classes)}
        best = max(best, sum(1 for p, t in zip(pred, truth) if target.get(p) == t))
    return best / float(len(pred))


def _random_labelings(seed, count=40):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(2, 13))
        yield rng.integers(0, 4, size=n).tolist(), rng.integers(0, 3, size=n).tolist()


class TestContingencyTable(unittest.TestCase):
    def test_counts(self):
        table = metrics.ContingencyTable.from_labels([0, 0, 2, 2, 2], [1, 1, 1, 0, 0])
        np.testing.assert_array_equal([[0, 2], [2, 1]], table.counts)
        np.testing.assert_array_equal([0, 2], table.pred_classes)
        np.testing.assert_array_equal([2, 3], table.pred_marginals)
        np.testing.assert_array_equal([2, 3], table.true_marginals)
        self.assertEqual(5, table.total)

    def test_squared(self):
        table = metrics.ContingencyTable.from_labels([0, 0, 0], [0, 1, 2])
        np.testing.assert_array_equal([[1, 1, 1], [0, 0, 0], [0, 0, 0]], table.squared())

    def test_length_mismatch(self):
        with self.assertRaises(ArgumentError):
            metrics.ContingencyTable.from_labels([0, 1], [0])


class TestHungarian(unittest.TestCase):
    def test_examples(self):
        np.testing.assert_array_equal([0, 1], metrics.hungarian([[1, 2], [2, 1]]))
        np.testing.assert_array_equal([1, 0], metrics.hungarian([[4, 1], [2, 3]]))
        np.testing.assert_array_equal([0, 1, 2, 3], metrics.hungarian(1 - np.eye(4)))

    def test_exhaustive(self):
        rng = np.random.default_rng(0)
        for k in range(1, 7):
            for _ in range(5):
                cost = rng.normal(size=(k, k))
                perm = metrics.hungarian(cost)
                self.assertEqual(sorted(perm.tolist()), list(range(k)))
                best = min(sum(cost[i, p[i]] for i in range(k)) for p in itertools.permutations(range(k)))
                self.assertAlmostEqual(best, cost[np.arange(k), perm].sum(), places=10)

    def test_contract(self):
        with self.assertRaises(ContractViolation):
            metrics.hungarian(np.ones((2, 3)))
        with self.assertRaises(ContractViolation):
            metrics.hungarian([[0.0, np.inf], [1.0, 0.0]])


class TestAcc(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(1.0, metrics.acc([0, 1, 1, 2], [0, 1, 1, 2]))
        self.assertEqual(1.0, metrics.acc([2, 0, 0, 1], [0, 1, 1, 2]))
        self.assertEqual(0.5, metrics.acc([0, 0, 1, 1], [0, 1, 0, 1]))

    def test_more_clusters_than_classes(self):
        self.assertAlmostEqual(1 / 3.0, metrics.acc([0, 1, 2], [0, 0, 0]))

    def test_brute_force(self):
        for pred, truth in _random_labelings(1):
            self.assertAlmostEqual(brute_acc(pred, truth), metrics.acc(pred, truth), places=12)

    def test_balanced_lower_bound(self):
        rng = np.random.default_rng(2)
        truth = np.repeat(np.arange(3), 5)
        for _ in range(30):
            self.assertTrue(metrics.acc(rng.integers(0, 3, size=15), truth) >= 1 / 3.0 - 1e-12)


class TestNmi(unittest.TestCase):
    def test_examples(self):
        self.assertAlmostEqual(1.0, metrics.nmi([0, 0, 1, 1, 2], [0, 0, 1, 1, 2]), places=12)
        self.assertAlmostEqual(1.0, metrics.nmi([0, 0, 1, 1], [1, 1, 0, 0]), places=12)
        self.assertAlmostEqual(0.0, metrics.nmi([0, 0, 1, 1], [0, 1, 0, 1]), places=12)

    def test_single_cluster(self):
        self.assertEqual(1.0, metrics.nmi([0, 0, 0], [4, 4, 4]))
        self.assertEqual(0.0, metrics.nmi([0, 0, 0], [0, 1, 1]))

    def test_brute_force(self):
        for pred, truth in _random_labelings(3):
            for average in ('geometric', 'arithmetic'):
                expected = min(max(brute_nmi(pred, truth, average), 0.0), 1.0)
                self.assertTrue(abs(expected - metrics.nmi(pred, truth, average)) <= 1e-12, (pred, truth, average))

    def test_bad_average(self):
        with self.assertRaises(ArgumentError):
            metrics.nmi([0, 1], [0, 1], average='max')


class TestAri(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(1.0, metrics.ari([0, 1, 1, 2], [0, 1, 1, 2]))
        self.assertAlmostEqual(-0.5, metrics.ari([0, 0, 1, 1], [0, 1, 0, 1]), places=12)

    def test_brute_force(self):
        for pred, truth in _random_labelings(4):
            self.assertTrue(abs(brute_ari(pred, truth) - metrics.ari(pred, truth)) <= 1e-12, (pred, truth))


class TestMacroF1(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(1.0, metrics.macro_f1([1, 1, 0, 0], [1, 1, 0, 0]))
        self.assertAlmostEqual(1 / 3.0, metrics.macro_f1([0, 0, 0, 0], [0, 0, 1, 1]), places=12)

    def test_partial(self):
        """
        Cluster 0 maps to class 0 (precision 2/3, recall 1) and cluster 1
        to class 1 (precision 1, recall 1/2).
        """
        self.assertAlmostEqual(0.8 / 2 + (2 / 3.0) / 2, metrics.macro_f1([0, 0, 0, 1], [0, 0, 1, 1]), places=12)


class TestRelabelingInvariance(unittest.TestCase):
    def test_random(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            truth = rng.integers(0, 3, size=12)
            pred = rng.integers(0, 3, size=12)
            relabel = rng.permutation(3)
            before = metrics.evaluate(pred, truth)
            after = metrics.evaluate(relabel[pred], truth)
            swapped = metrics.evaluate(pred, relabel[truth])
            # F1 depends on which optimal matching wins a tie.
            for name in ('acc', 'nmi', 'ari'):
                self.assertAlmostEqual(before[name], after[name], places=12)
                self.assertAlmostEqual(before[name], swapped[name], places=12)

    def test_f1(self):
        self.assertAlmostEqual(metrics.macro_f1([0, 0, 0, 1], [0, 0, 1, 1]),
                               metrics.macro_f1([1, 1, 1, 0], [0, 0, 1, 1]), places=12)

    def test_evaluate_keys(self):
        self.assertEqual(set(metrics.METRIC_NAMES), set(metrics.evaluate([0, 1], [0, 1])))


class TestKMeans(unittest.TestCase):
    def test_one_dimensional(self):
        labels, centroids = metrics.kmeans([0.0, 0.1, 10.0, 10.1], 2, seed=0)
        self.assertEqual(labels[0], labels[1])
        self.assertEqual(labels[2], labels[3])
        self.assertNotEqual(labels[0], labels[2])
        np.testing.assert_allclose([0.05, 10.05], np.sort(centroids.ravel()))

    def test_k_equals_n(self):
        points = np.random.default_rng(0).normal(size=(5, 2))
        result = metrics.kmeans(points, 5, seed=1)
        self.assertEqual(list(range(5)), sorted(result.labels.tolist()))
        self.assertEqual(0.0, result.inertia)

    def test_inertia_monotone(self):
        for seed in range(5):
            points = np.random.default_rng(seed).normal(size=(60, 3))
            trace = metrics.kmeans(points, 4, seed=seed).inertia_trace
            self.assertTrue(all(b <= a + 1e-9 for a, b in zip(trace, trace[1:])), trace)

    def test_deterministic(self):
        points = np.random.default_rng(3).normal(size=(40, 2))
        a = metrics.kmeans(points, 3, seed=11)
        b = metrics.kmeans(points, 3, seed=11)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.centroids, b.centroids)

    def test_separated_blobs(self):
        rng = np.random.default_rng(4)
        centres = np.array([[0.0, 0.0], [20.0, 0.0], [0.0, 20.0]])
        truth = np.repeat(np.arange(3), 20)
        points = centres[truth] + rng.normal(scale=0.5, size=(60, 2))
        self.assertEqual(1.0, metrics.acc(metrics.kmeans(points, 3, seed=0).labels, truth))

    def test_too_many_clusters(self):
        with self.assertRaises(ArgumentError):
            metrics.kmeans(np.zeros((2, 2)), 3, seed=0)

    def test_identical_points(self):
        with capture_logging(logging.getLogger('agclust.metrics')) as records:
            with self.assertRaises(DegenerateClusteringError):
                metrics.kmeans(np.ones((6, 2)), 2, seed=0)
        self.assertTrue(any(r.levelno == logging.WARNING for r in records))

    def test_restarts_give_up(self):
        with capture_logging(logging.getLogger('agclust.metrics')):
            with self.assertRaises(DegenerateClusteringError):
                metrics.kmeans_restarts(np.ones((6, 2)), 2, seed=0, attempts=3)

    def test_restarts_first_attempt(self):
        points = np.random.default_rng(6).normal(size=(30, 2))
        a = metrics.kmeans_restarts(points, 3, seed=2)
        b = metrics.kmeans(points, 3, seed=2)
        np.testing.assert_array_equal(a.labels, b.labels)


class TestNearestCentroid(unittest.TestCase):
    def test_assignments(self):
        points = np.array([[0.0, 0.0], [4.0, 0.1], [0.2, 3.9], [2.0, 0.0]])
        centroids = np.array([[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]])
        np.testing.assert_array_equal([0, 1, 2, 0], metrics.nearest_centroid(points, centroids))

    def test_matches_kmeans_labels(self):
        rng = np.random.default_rng(8)
        points = np.vstack([rng.normal(size=(10, 3)), rng.normal(size=(10, 3)) + 6.0])
        result = metrics.kmeans(points, 2, seed=0)
        np.testing.assert_array_equal(result.labels, metrics.nearest_centroid(points, result.centroids))

    def test_width_mismatch(self):
        with self.assertRaises(ContractViolation):
            metrics.nearest_centroid(np.zeros((3, 2)), np.zeros((2, 3)))
