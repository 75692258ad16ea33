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
Clustering quality metrics and the k-means clusterer.
"""

import logging

import attr
import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist
from scipy.special import comb, xlogy

from ._util import _coerce_label_pair, _derive_seed
from .common import ArgumentError, ContractViolation, DegenerateClusteringError

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

METRIC_NAMES = ('acc', 'nmi', 'ari', 'f1')

_NMI_AVERAGES = ('geometric', 'arithmetic')


@attr.s(frozen=True, eq=False)
class ContingencyTable(object):
    """
    :ivar counts: ``(K_pred, K_true)`` int64 matrix of co-occurrences.
    :ivar pred_classes: Sorted distinct predicted labels (row order).
    :ivar true_classes: Sorted distinct true labels (column order).
    """
    counts = attr.ib()
    pred_classes = attr.ib()
    true_classes = attr.ib()

    @classmethod
    def from_labels(cls, pred, truth):
        pred, truth = _coerce_label_pair(pred, truth)
        pred_classes, pred_idx = np.unique(pred, return_inverse=True)
        true_classes, true_idx = np.unique(truth, return_inverse=True)
        counts = np.zeros((pred_classes.shape[0], true_classes.shape[0]), dtype=np.int64)
        np.add.at(counts, (pred_idx, true_idx), 1)
        return cls(counts, pred_classes, true_classes)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def pred_marginals(self):
        return self.counts.sum(axis=1)

    @property
    def true_marginals(self):
        return self.counts.sum(axis=0)

    def squared(self):
        """
        The counts padded with zero rows or columns to a square matrix.
        """
        size = max(self.counts.shape)
        out = np.zeros((size, size), dtype=np.int64)
        out[:self.counts.shape[0], :self.counts.shape[1]] = self.counts
        return out


def hungarian(cost):
    """
    Solve the square assignment problem.

    :returns: int64 array *perm* with ``perm[row]`` the column assigned to
        *row*, minimizing ``Σ cost[row, perm[row]]``.
    :raises ContractViolation: unless *cost* is a finite square matrix.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
        raise ContractViolation('hungarian needs a square matrix, got shape {}'.format(cost.shape))
    if not np.all(np.isfinite(cost)):
        raise ContractViolation('hungarian needs finite costs')
    rows, cols = linear_sum_assignment(cost)
    perm = np.empty(cost.shape[0], dtype=np.int64)
    perm[rows] = cols
    return perm


def _best_mapping(table):
    counts = table.squared()
    return counts, hungarian(-counts)


def acc(pred, truth):
    """
    Fraction of nodes labelled correctly under the best one-to-one mapping
    of predicted clusters onto true classes.
    """
    table = ContingencyTable.from_labels(pred, truth)
    counts, perm = _best_mapping(table)
    return float(counts[np.arange(counts.shape[0]), perm].sum()) / table.total


def _entropy(marginals, total):
    p = marginals / total
    return -float(xlogy(p, p).sum())


def nmi(pred, truth, average='geometric'):
    """
    Normalized mutual information.

    :param str average:
        ``'geometric'`` divides by ``√(H(pred)·H(truth))``, ``'arithmetic'``
        by their mean.
    :returns: 1.0 when both labelings are a single cluster; 0.0 when only
        one of them is.
    """
    if average not in _NMI_AVERAGES:
        raise ArgumentError('average={!r} must be one of {}'.format(average, _NMI_AVERAGES))
    table = ContingencyTable.from_labels(pred, truth)
    n = float(table.total)
    h_pred = _entropy(table.pred_marginals, n)
    h_true = _entropy(table.true_marginals, n)
    if h_pred == 0.0 and h_true == 0.0:
        return 1.0
    if h_pred == 0.0 or h_true == 0.0:
        return 0.0
    joint = table.counts / n
    outer = np.outer(table.pred_marginals, table.true_marginals) / (n * n)
    nonzero = joint > 0
    mutual = float((joint[nonzero] * np.log(joint[nonzero] / outer[nonzero])).sum())
    if average == 'geometric':
        denominator = np.sqrt(h_pred * h_true)
    else:
        denominator = (h_pred + h_true) / 2.0
    return float(np.clip(mutual / denominator, 0.0, 1.0))


def ari(pred, truth):
    """
    Adjusted Rand index by pair counting on the contingency table.
    """
    table = ContingencyTable.from_labels(pred, truth)
    index = comb(table.counts, 2).sum()
    pred_pairs = comb(table.pred_marginals, 2).sum()
    true_pairs = comb(table.true_marginals, 2).sum()
    all_pairs = comb(table.total, 2)
    expected = pred_pairs * true_pairs / all_pairs if all_pairs else 0.0
    maximum = (pred_pairs + true_pairs) / 2.0
    if maximum == expected:
        return 1.0
    return float((index - expected) / (maximum - expected))


def macro_f1(pred, truth):
    """
    Unweighted mean over true classes of the F1 score after mapping
    predicted clusters onto classes as `acc` does. A class nothing maps
    onto scores 0.
    """
    table = ContingencyTable.from_labels(pred, truth)
    counts, perm = _best_mapping(table)
    pred_sizes = counts.sum(axis=1)
    true_sizes = counts.sum(axis=0)
    scores = []
    for row, col in enumerate(perm):
        if col >= table.true_classes.shape[0]:
            continue
        hits = counts[row, col]
        if hits == 0:
            scores.append(0.0)
            continue
        precision = hits / pred_sizes[row]
        recall = hits / true_sizes[col]
        scores.append(2.0 * precision * recall / (precision + recall))
    return float(np.mean(scores))


def evaluate(pred, truth):
    """
    :returns: dict with keys ``acc``, ``nmi``, ``ari`` and ``f1``.
    """
    return {
        'acc': acc(pred, truth),
        'nmi': nmi(pred, truth),
        'ari': ari(pred, truth),
        'f1': macro_f1(pred, truth),
    }


###############
#   k-means   #
###############


@attr.s(frozen=True, eq=False)
class KMeansResult(object):
    """
    Unpacks as ``labels, centroids = result``.

    :ivar inertia_trace:
        Sum of squared distances to the assigned centroid after each
        Lloyd iteration.
    """
    labels = attr.ib()
    centroids = attr.ib()
    inertia_trace = attr.ib()
    n_iter = attr.ib()

    def __iter__(self):
        return iter((self.labels, self.centroids))

    @property
    def inertia(self):
        return self.inertia_trace[-1]


def _plus_plus(points, k, rng):
    n = points.shape[0]
    centroids = [points[rng.integers(n)]]
    closest = cdist(points, centroids[0][None, :], 'sqeuclidean').ravel()
    for _ in range(1, k):
        total = closest.sum()
        if total > 0:
            index = rng.choice(n, p=closest / total)
        else:
            index = rng.integers(n)
        centroids.append(points[index])
        closest = np.minimum(closest, cdist(points, points[index][None, :], 'sqeuclidean').ravel())
    return np.array(centroids)


def _lloyd(points, centroids, max_iters):
    labels = None
    trace = []
    for iteration in range(1, max_iters + 1):
        distances = cdist(points, centroids, 'sqeuclidean')
        new_labels = np.argmin(distances, axis=1)
        for cluster in range(centroids.shape[0]):
            members = new_labels == cluster
            if members.any():
                continue
            # Empty cluster: move its centroid onto the worst-served point.
            far = int(np.argmax(distances[np.arange(points.shape[0]), new_labels]))
            log.warning('k-means: cluster %d emptied at iteration %d, re-seeding at point %d',
                        cluster, iteration, far)
            centroids[cluster] = points[far]
            distances = cdist(points, centroids, 'sqeuclidean')
            new_labels = np.argmin(distances, axis=1)
        trace.append(float(distances[np.arange(points.shape[0]), new_labels].sum()))
        if labels is not None and np.array_equal(labels, new_labels):
            break
        labels = new_labels
        for cluster in range(centroids.shape[0]):
            members = labels == cluster
            if members.any():
                centroids[cluster] = points[members].mean(axis=0)
    # Labels always refer to the returned centroids.
    distances = cdist(points, centroids, 'sqeuclidean')
    labels = np.argmin(distances, axis=1)
    final = float(distances[np.arange(points.shape[0]), labels].sum())
    if final < trace[-1]:
        trace.append(final)
    return labels.astype(np.int64), centroids, trace, iteration


def kmeans(points, k, seed, max_iters=300):
    """
    k-means++ seeding followed by Lloyd iterations until the assignment
    stops changing or *max_iters* is reached. Deterministic per *seed*.

    :returns: `KMeansResult` (unpacks as ``labels, centroids``).
    :raises ArgumentError: when there are fewer points than clusters.
    :raises DegenerateClusteringError: if a cluster is still empty at the end.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points[:, None]
    if points.ndim != 2:
        raise ContractViolation('kmeans needs an (N, d) matrix, got shape {}'.format(points.shape))
    if k < 1 or points.shape[0] < k:
        raise ArgumentError('kmeans needs 1 <= k <= N, got k={} N={}'.format(k, points.shape[0]))
    if max_iters < 1:
        raise ArgumentError('max_iters={} must be positive'.format(max_iters))
    rng = np.random.default_rng(seed)
    centroids = _plus_plus(points, k, rng)
    labels, centroids, trace, n_iter = _lloyd(points, centroids, max_iters)
    if np.unique(labels).shape[0] < k:
        raise DegenerateClusteringError('kmeans produced {} non-empty clusters of {}'.format(
            np.unique(labels).shape[0], k))
    log.debug('kmeans: k=%d N=%d converged after %d iterations, inertia %.6g',
              k, points.shape[0], n_iter, trace[-1])
    return KMeansResult(labels, centroids, trace, n_iter)


def nearest_centroid(points, centroids):
    """
    Index of the closest centroid (squared Euclidean) for every row of
    *points*; ties go to the smallest index.
    """
    points = np.asarray(points, dtype=np.float64)
    centroids = np.asarray(centroids, dtype=np.float64)
    if points.ndim != 2 or centroids.ndim != 2 or points.shape[1] != centroids.shape[1]:
        raise ContractViolation('cannot compare points {} with centroids {}'.format(points.shape, centroids.shape))
    return np.argmin(cdist(points, centroids, 'sqeuclidean'), axis=1).astype(np.int64)


def kmeans_restarts(points, k, seed, attempts=10, max_iters=300):
    """
    Run `kmeans`, re-seeding after a degenerate result up to *attempts* times.
    """
    last = None
    for attempt in range(attempts):
        try:
            return kmeans(points, k, seed if attempt == 0 else _derive_seed(seed, attempt), max_iters)
        except DegenerateClusteringError as e:
            log.warning('k-means attempt %d of %d was degenerate: %s', attempt + 1, attempts, e)
            last = e
    raise last
