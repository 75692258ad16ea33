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
Stochastic graph views: adaptive edge dropping and attribute masking.

Perturbation is drop-only. Masking zeroes whole attribute dimensions
(columns) across every node.
"""

import logging

import numpy as np
from scipy import sparse

from .common import AttributedGraph, AugmentationSpec, GraphView
from .graph import degree_vector, sym_normalize

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

NO_AUGMENTATION = AugmentationSpec(edge_drop_rate=0.0, attr_mask_rate=0.0, adaptive=False)


def _rescale(weights, rate, cap):
    """
    Map centrality weights to probabilities ``rate·(w_max − w)/(w_max − w_mean)``
    clamped to ``[0, cap]``; equal weights give *rate* everywhere.
    """
    if weights.size == 0:
        return np.zeros(0)
    w_max = weights.max()
    w_mean = weights.mean()
    if np.isclose(w_max, w_mean, rtol=0.0, atol=1e-12):
        return np.full(weights.shape, rate)
    return np.clip(rate * (w_max - weights) / (w_max - w_mean), 0.0, cap)


def edge_drop_probs(graph, spec):
    """
    Drop probability of each edge of ``graph.edges``, in that order.

    Adaptive weighting uses the edge centrality
    ``(log(1 + deg u) + log(1 + deg v)) / 2``.
    """
    edges = graph.edges
    if not spec.adaptive:
        return np.full(edges.shape[0], spec.edge_drop_rate)
    log_deg = np.log1p(degree_vector(graph))
    weights = (log_deg[edges[:, 0]] + log_deg[edges[:, 1]]) / 2.0
    return _rescale(weights, spec.edge_drop_rate, spec.prob_cap)


def attr_mask_probs(graph, spec):
    """
    Masking probability of each attribute dimension.

    Adaptive weighting uses ``w_f = Σ_i |X[i, f]|·log(1 + deg i)``, so
    dimensions carried by well-connected nodes are masked less often.
    """
    if not spec.adaptive:
        return np.full(graph.attr_dim, spec.attr_mask_rate)
    centrality = np.log1p(degree_vector(graph))
    weights = np.abs(graph.attributes).T @ centrality
    return _rescale(weights, spec.attr_mask_rate, spec.prob_cap)


def sample_view(graph, spec, seed):
    """
    Sample one augmented view of *graph*.

    Each edge survives independently with one minus its drop probability
    (both directions together). Each attribute dimension is zeroed with its
    masking probability. The result depends only on ``(graph, spec, seed)``.

    :returns: `GraphView` with its normalized adjacency recomputed.
    """
    rng = np.random.default_rng(seed)
    edges = graph.edges
    keep = rng.random(edges.shape[0]) >= edge_drop_probs(graph, spec)
    masked = rng.random(graph.attr_dim) < attr_mask_probs(graph, spec)

    kept = edges[keep]
    n = graph.n_nodes
    rows = np.concatenate([kept[:, 0], kept[:, 1]])
    cols = np.concatenate([kept[:, 1], kept[:, 0]])
    adjacency = sparse.csr_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(n, n))
    adjacency.sort_indices()

    attributes = graph.attributes.copy()
    attributes[:, masked] = 0.0
    log.debug('view seed=%d kept %d/%d edges, masked %d/%d dims',
              seed, kept.shape[0], edges.shape[0], int(masked.sum()), graph.attr_dim)
    return GraphView(attributes, adjacency, sym_normalize(adjacency))


def raw_view(graph):
    """
    The unperturbed view of *graph*.
    """
    if not isinstance(graph, AttributedGraph):
        raise TypeError('{!r} is not an AttributedGraph'.format(graph))
    return GraphView(graph.attributes, graph.adjacency, sym_normalize(graph))
