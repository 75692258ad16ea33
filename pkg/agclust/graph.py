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
Attributed graph ingestion, propagation-operator normalization and
synthetic stochastic block model graphs.
"""

import logging
import os

import networkx as nx
import numpy as np
from scipy import sparse

from . import codec
from .common import (
    ArgumentError, AttributedGraph, GraphView, MalformedGraphError,
    NormalizedAdjacency, ParseError,
)

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

EDGES_FILE = 'edges.txt'
ATTRS_FILE = 'attrs.csv'
LABELS_FILE = 'labels.txt'
GRAPH_FILE = 'graph.json'


def load_graph(edges_path, attrs_path, labels_path=None):
    """
    Read a graph from an edge list, an attribute CSV and optional labels.

    The node count is the number of attribute rows.

    :raises ParseError: for unreadable files.
    :raises MalformedGraphError:
        for an edge endpoint outside ``[0, N)`` or a label count other than *N*.
    """
    attributes = codec.read_attributes_csv(attrs_path)
    edges = codec.read_edge_list(edges_path)
    labels = None if labels_path is None else codec.read_labels(labels_path)
    try:
        graph = AttributedGraph.from_edges(attributes, edges, labels)
    except MalformedGraphError as e:
        raise MalformedGraphError('{}: {}'.format(edges_path, e))
    log.debug('loaded %r from %s', graph, edges_path)
    return graph


def save_graph_files(graph, directory):
    """
    Write ``edges.txt``, ``attrs.csv`` and (with ground truth) ``labels.txt``
    into *directory*, which must exist.

    :returns: dict mapping ``edges``/``attrs``/``labels`` to the paths written.
    """
    paths = {
        'edges': os.path.join(directory, EDGES_FILE),
        'attrs': os.path.join(directory, ATTRS_FILE),
    }
    codec.write_edge_list(paths['edges'], graph.edges)
    codec.write_attributes_csv(paths['attrs'], graph.attributes)
    if graph.true_labels is not None:
        paths['labels'] = os.path.join(directory, LABELS_FILE)
        codec.write_labels(paths['labels'], graph.true_labels)
    return paths


def save_graph(graph, path):
    """
    Write *graph* as a single JSON document.
    """
    codec.write_json(path, codec.graph_to_document(graph))


def load_graph_json(path):
    try:
        attributes, edges, labels = codec.graph_from_document(codec.read_json(path))
    except ParseError as e:
        if e.path is None:
            e.path = path
        raise
    return AttributedGraph.from_edges(attributes, edges, labels)


def _adjacency_of(source):
    if isinstance(source, (AttributedGraph, GraphView)):
        return source.adjacency
    if sparse.issparse(source):
        return source
    raise ArgumentError('cannot normalize {!r}'.format(source))


def sym_normalize(source):
    """
    Build ``D̃^-1/2 (G + I) D̃^-1/2`` where ``d̃_i = 1 + degree(i)``.

    :param source:
        An `AttributedGraph`, a `GraphView` or a symmetric sparse adjacency
        with zero diagonal.
    :returns: `NormalizedAdjacency`
    """
    adjacency = _adjacency_of(source)
    n = adjacency.shape[0]
    with_loops = sparse.csr_matrix(adjacency, dtype=np.float64) + sparse.identity(n, format='csr')
    inv_sqrt = sparse.diags(1.0 / np.sqrt(np.asarray(with_loops.sum(axis=1)).ravel()))
    matrix = (inv_sqrt @ with_loops @ inv_sqrt).tocsr()
    matrix.sort_indices()
    return NormalizedAdjacency(matrix)


def degree_vector(graph):
    """
    Number of undirected edges incident to each node.
    """
    return np.asarray(_adjacency_of(graph).sum(axis=1)).ravel().astype(np.int64)


def generate_sbm(n, k, p_in, p_out, attr_dim, separation, noise_sd, seed):
    """
    Sample an attributed stochastic block model graph.

    Nodes ``[b*n/k, (b+1)*n/k)`` form block *b*. Each intra-block pair is an
    edge with probability *p_in*, each inter-block pair with *p_out*. Block
    *b* draws attributes from a Gaussian centred on ``separation/√2 · e_b``,
    so distinct block means sit exactly *separation* apart, with standard
    deviation *noise_sd* in every dimension. ``true_labels`` holds the
    block ids.

    :raises ArgumentError:
        when *n* is not divisible by *k*, ``0 ≤ p_out ≤ p_in ≤ 1`` fails,
        ``attr_dim < k``, ``separation < 0`` or ``noise_sd ≤ 0``.
    """
    if k < 1 or n < 1 or n % k:
        raise ArgumentError('n={} must be a positive multiple of k={}'.format(n, k))
    if not 0.0 <= p_out <= p_in <= 1.0:
        raise ArgumentError('need 0 <= p_out <= p_in <= 1, got p_in={} p_out={}'.format(p_in, p_out))
    if attr_dim < k:
        raise ArgumentError('attr_dim={} must be at least k={}'.format(attr_dim, k))
    if separation < 0:
        raise ArgumentError('separation={} must be non-negative'.format(separation))
    if not noise_sd > 0:
        raise ArgumentError('noise_sd={} must be positive'.format(noise_sd))

    size = n // k
    probs = np.full((k, k), float(p_out))
    np.fill_diagonal(probs, float(p_in))
    sbm = nx.stochastic_block_model([size] * k, probs.tolist(), seed=seed)
    edges = sorted(sbm.edges())

    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(k, dtype=np.int64), size)
    means = np.zeros((k, attr_dim))
    means[np.arange(k), np.arange(k)] = separation / np.sqrt(2.0)
    attributes = means[labels] + rng.normal(0.0, noise_sd, size=(n, attr_dim))

    graph = AttributedGraph.from_edges(attributes, edges, labels)
    log.debug('generated SBM %r (p_in=%g p_out=%g sep=%g seed=%d)', graph, p_in, p_out, separation, seed)
    return graph
