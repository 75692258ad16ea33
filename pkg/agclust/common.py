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
Records and exceptions shared by every :mod:`agclust` module.
"""

import attr
import numpy as np
from scipy import sparse

# Constants
FORMAT_VERSION = 1  # Graph documents and model checkpoints
COSINE_EPS = 1e-12  # Floor on row norms inside cosine similarity
LOG_EPS = 1e-12  # Guards log(0) for empty clusters in the regularizer
DEFAULT_PROB_CAP = 0.7

INIT_FORWARD_ARGMAX = 'forward_argmax'
INIT_KMEANS_ON_M = 'kmeans_on_m'
_INIT_MODES = (INIT_FORWARD_ARGMAX, INIT_KMEANS_ON_M)


#################
#   Exceptions  #
#################


class ClusteringError(Exception):
    """
    Root of every exception raised by agclust.
    """


class ArgumentError(ClusteringError, ValueError):
    """
    A call received an argument outside its documented domain.
    """


class ContractViolation(ClusteringError, ValueError):
    """
    Operands have incompatible shapes or dimensions.
    """


class MalformedGraphError(ClusteringError):
    """
    A graph is structurally invalid: an edge endpoint is out of range,
    the adjacency is asymmetric or has a non-zero diagonal, or the labels
    do not fit the node count.
    """


class ParseError(ClusteringError):
    """
    An input file could not be parsed.

    :ivar str path: File being read, or ``None``.
    :ivar int line: One-based line number of the offending record, or ``None``.
    """
    def __init__(self, message, path=None, line=None):
        super(ParseError, self).__init__(message)
        self.path = path
        self.line = line

    def __str__(self):
        base = Exception.__str__(self)
        if self.path is None:
            return base
        if self.line is None:
            return '{}: {}'.format(self.path, base)
        return '{}:{}: {}'.format(self.path, self.line, base)


class NumericError(ClusteringError, ArithmeticError):
    """
    A computation produced a non-finite value.

    :ivar int step: Training step at which it happened, or ``None``.
    :ivar dict components:
        Loss component values observed at that step (may be empty).
    """
    def __init__(self, message, step=None, components=None):
        super(NumericError, self).__init__(message)
        self.step = step
        self.components = dict(components or {})

    def __str__(self):
        bits = [Exception.__str__(self)]
        if self.step is not None:
            bits.append('at step {:d}'.format(self.step))
        if self.components:
            bits.append(' '.join('{}={:.6g}'.format(k, v) for k, v in sorted(self.components.items())))
        return ' '.join(bits)


class DegenerateClusteringError(ClusteringError):
    """
    k-means could not produce ``k`` non-empty clusters.
    """


#################
#   Validators  #
#################


def _check_probability(inst, attribute, value):
    if not 0.0 <= value <= 1.0:
        raise ArgumentError('{}={!r} must be a probability in [0, 1]'.format(attribute.name, value))


def _check_positive(inst, attribute, value):
    if not value > 0:
        raise ArgumentError('{}={!r} must be positive'.format(attribute.name, value))


def _check_nonnegative(inst, attribute, value):
    if not value >= 0:
        raise ArgumentError('{}={!r} must be non-negative'.format(attribute.name, value))


def _check_positive_int(inst, attribute, value):
    if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
        raise ArgumentError('{}={!r} must be a positive integer'.format(attribute.name, value))


def _as_label_vector(labels, name='labels'):
    """
    Coerce *labels* to a 1-D ``int64`` vector of non-negative cluster ids.

    :raises ArgumentError: for non-integral, negative or multi-dimensional input
    """
    arr = np.asarray(labels)
    if arr.ndim != 1:
        raise ArgumentError('{} must be a 1-D vector, got shape {}'.format(name, arr.shape))
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.mod(arr, 1) == 0):
            raise ArgumentError('{} must hold integers'.format(name))
    arr = arr.astype(np.int64)
    if arr.size and arr.min() < 0:
        raise ArgumentError('{} must be non-negative, found {}'.format(name, arr.min()))
    return arr


###############
#   Records   #
###############


def _symmetric_binary(matrix):
    matrix = sparse.csr_matrix(matrix, dtype=np.float64)
    matrix.sum_duplicates()
    matrix.eliminate_zeros()
    matrix.sort_indices()
    return matrix


@attr.s(frozen=True, eq=False, repr=False)
class AttributedGraph(object):
    """
    An undirected graph whose nodes carry real-valued attribute vectors.

    Build instances with :meth:`from_edges` unless you already hold a valid
    sparse adjacency. The constructor validates the invariants and raises
    :exc:`MalformedGraphError` when one fails.

    :ivar int n_nodes: Node count *N*.
    :ivar int attr_dim: Attribute dimension *d*.
    :ivar attributes: Dense ``(N, d)`` float64 attribute matrix *X*.
    :ivar adjacency:
        Symmetric binary :class:`scipy.sparse.csr_matrix` with an all-zero
        diagonal.
    :ivar true_labels:
        Ground-truth cluster ids (``int64`` vector of length *N*) or
        ``None``. They are carried for evaluation only.
    """
    attributes = attr.ib(converter=lambda x: np.array(x, dtype=np.float64))
    adjacency = attr.ib(converter=_symmetric_binary)
    true_labels = attr.ib(default=None)

    def __attrs_post_init__(self):
        x = self.attributes
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise MalformedGraphError('attributes must be a non-empty 2-D matrix, got shape {}'.format(x.shape))
        if not np.all(np.isfinite(x)):
            raise MalformedGraphError('attributes contain non-finite entries')
        n = x.shape[0]
        adj = self.adjacency
        if adj.shape != (n, n):
            raise MalformedGraphError('adjacency shape {} does not match {} nodes'.format(adj.shape, n))
        if adj.nnz and np.any(adj.data != 1.0):
            raise MalformedGraphError('adjacency must be binary')
        if adj.diagonal().any():
            raise MalformedGraphError('adjacency has self-loops')
        if (adj != adj.T).nnz:
            raise MalformedGraphError('adjacency is not symmetric')
        if self.true_labels is not None:
            try:
                labels = _as_label_vector(self.true_labels, 'true_labels')
            except ArgumentError as e:
                raise MalformedGraphError(str(e))
            if labels.shape[0] != n:
                raise MalformedGraphError('{} labels for {} nodes'.format(labels.shape[0], n))
            object.__setattr__(self, 'true_labels', labels)

    @classmethod
    def from_edges(cls, attributes, edges, true_labels=None):
        """
        Build a graph from an edge listing.

        Duplicate and reversed listings collapse to one undirected edge and
        self-loops are dropped.

        :param attributes: ``(N, d)`` attribute matrix.
        :param edges: Iterable of ``(u, v)`` 0-indexed node pairs.
        :raises MalformedGraphError: when an endpoint is outside ``[0, N)``.
        """
        attributes = np.array(attributes, dtype=np.float64)
        if attributes.ndim != 2:
            raise MalformedGraphError('attributes must be 2-D, got shape {}'.format(attributes.shape))
        n = attributes.shape[0]
        pairs = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
        if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
            bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
            raise MalformedGraphError('edge ({}, {}) has an endpoint outside [0, {})'.format(bad[0], bad[1], n))
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
        cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
        adjacency = sparse.coo_matrix((np.ones(rows.shape[0]), (rows, cols)), shape=(n, n)).tocsr()
        adjacency.data[:] = 1.0  # Collapse duplicate listings
        return cls(attributes, adjacency, true_labels)

    @property
    def n_nodes(self):
        return self.attributes.shape[0]

    @property
    def attr_dim(self):
        return self.attributes.shape[1]

    @property
    def edges(self):
        """
        ``(E, 2)`` int64 array of undirected edges with ``u < v``, sorted.
        """
        upper = sparse.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((upper.col, upper.row))
        return np.stack([upper.row[order], upper.col[order]], axis=1).astype(np.int64)

    @property
    def n_edges(self):
        return self.adjacency.nnz // 2

    @property
    def n_clusters(self):
        """
        ``max(true_labels) + 1``, or ``None`` without ground truth.
        """
        if self.true_labels is None:
            return None
        return int(self.true_labels.max()) + 1

    def __repr__(self):
        return '<AttributedGraph N={} d={} edges={}{}>'.format(
            self.n_nodes, self.attr_dim, self.n_edges,
            '' if self.true_labels is None else ' K={}'.format(self.n_clusters),
        )


@attr.s(frozen=True, eq=False)
class NormalizedAdjacency(object):
    """
    The propagation operator ``D̃^-1/2 (G + I) D̃^-1/2``.

    :ivar matrix: Symmetric :class:`scipy.sparse.csr_matrix`.
    """
    matrix = attr.ib()

    @property
    def shape(self):
        return self.matrix.shape

    def toarray(self):
        return self.matrix.toarray()


@attr.s(frozen=True)
class AugmentationSpec(object):
    """
    Parameters of one stochastic graph view.

    :ivar float edge_drop_rate: Base edge drop probability.
    :ivar float attr_mask_rate: Base attribute-dimension masking probability.
    :ivar float prob_cap: Upper clamp applied to adaptive probabilities.
    :ivar bool adaptive:
        Scale the base rates by degree centrality (low-centrality edges and
        dimensions are perturbed more often).
    """
    edge_drop_rate = attr.ib(default=0.3, converter=float, validator=_check_probability)
    attr_mask_rate = attr.ib(default=0.3, converter=float, validator=_check_probability)
    prob_cap = attr.ib(default=DEFAULT_PROB_CAP, converter=float, validator=_check_probability)
    adaptive = attr.ib(default=True, converter=bool)

    @prob_cap.validator
    def _check_cap(self, attribute, value):
        if value <= 0.0:
            raise ArgumentError('prob_cap={!r} must be in (0, 1]'.format(value))


@attr.s(frozen=True, eq=False)
class GraphView(object):
    """
    One augmented copy of a graph.

    :ivar attributes: ``(N, d)`` masked attribute matrix.
    :ivar adjacency: Perturbed symmetric binary CSR adjacency.
    :ivar normalized: :class:`NormalizedAdjacency` of *adjacency*.
    """
    attributes = attr.ib()
    adjacency = attr.ib()
    normalized = attr.ib()

    @property
    def n_nodes(self):
        return self.attributes.shape[0]

    @property
    def n_edges(self):
        return self.adjacency.nnz // 2


@attr.s(frozen=True)
class ModelWidths(object):
    """
    Layer widths. The encoder output is 256 and the projection output 128
    wide; the hidden widths have no canonical value and default to 256.
    """
    hidden = attr.ib(default=256, validator=_check_positive_int)
    embed = attr.ib(default=256, validator=_check_positive_int)
    proj_hidden = attr.ib(default=256, validator=_check_positive_int)
    proj_out = attr.ib(default=128, validator=_check_positive_int)
    cluster_hidden = attr.ib(default=256, validator=_check_positive_int)


@attr.s(frozen=True)
class Ablation(object):
    """
    :ivar bool no_ccm: Drop the cluster contrastive loss and the regularizer.
    :ivar bool no_ssc:
        Replace the pseudo-label contrastive loss with plain NT-Xent.
    """
    no_ccm = attr.ib(default=False, converter=bool)
    no_ssc = attr.ib(default=False, converter=bool)


def _augmentation_pair(value):
    if isinstance(value, AugmentationSpec):
        return (value, value)
    return tuple(value)


@attr.s(frozen=True)
class TrainConfig(object):
    """
    Hyper-parameters of one training run.

    Defaults: ``tau1 = tau2 = 0.5``, ``gamma = 1``, ``lr = 1e-4`` for the
    main loop, ``pretrain_lr = 1e-3``, ``t_max = 400``,
    ``pretrain_steps = 200``, ``head_warmup_steps = 100`` and a
    pseudo-label refresh every 5 steps.

    :ivar float pretrain_lr:
        Adam learning rate of the pretraining and head warm-start phases.
    :ivar int head_warmup_steps:
        Cross-entropy steps fitting the clustering head to the initial pseudo
        labels before the main loop starts. Ignored under ``no_ccm``.
    :ivar augmentation: Pair of :class:`AugmentationSpec`, one per view.
    :ivar str init_labels:
        ``'kmeans_on_m'`` (k-means on the pretrained projections) or
        ``'forward_argmax'`` (argmax of the clustering head on the raw graph).
    :ivar bool linear_second_layer: Skip the ReLU on the second GCN layer.
    :ivar bool exclude_self_in_ccl:
        Drop the ``j = k`` self term from the cluster-contrast denominator.
    :ivar bool literal_reg_sign:
        Minimize the entropy of cluster masses instead of maximizing it.
    """
    k = attr.ib(validator=_check_positive_int)
    tau1 = attr.ib(default=0.5, converter=float, validator=_check_positive)
    tau2 = attr.ib(default=0.5, converter=float, validator=_check_positive)
    gamma = attr.ib(default=1.0, converter=float, validator=_check_nonnegative)
    lr = attr.ib(default=1e-4, converter=float, validator=_check_positive)
    pretrain_lr = attr.ib(default=1e-3, converter=float, validator=_check_positive)
    t_max = attr.ib(default=400)
    pretrain_steps = attr.ib(default=200)
    head_warmup_steps = attr.ib(default=100)
    label_refresh_period = attr.ib(default=5, validator=_check_positive_int)
    widths = attr.ib(default=attr.Factory(ModelWidths))
    augmentation = attr.ib(
        default=attr.Factory(lambda: (AugmentationSpec(), AugmentationSpec())),
        converter=_augmentation_pair,
    )
    seed = attr.ib(default=0, converter=int)
    ablation = attr.ib(default=attr.Factory(Ablation))
    init_labels = attr.ib(default=INIT_KMEANS_ON_M, validator=attr.validators.in_(_INIT_MODES))
    linear_second_layer = attr.ib(default=False, converter=bool)
    exclude_self_in_ccl = attr.ib(default=False, converter=bool)
    literal_reg_sign = attr.ib(default=False, converter=bool)

    @k.validator
    def _check_k(self, attribute, value):
        if value < 2:
            raise ArgumentError('k={!r} must be at least 2'.format(value))

    @t_max.validator
    @pretrain_steps.validator
    @head_warmup_steps.validator
    def _check_steps(self, attribute, value):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 0:
            raise ArgumentError('{}={!r} must be a non-negative integer'.format(attribute.name, value))

    @augmentation.validator
    def _check_augmentation(self, attribute, value):
        if len(value) != 2 or not all(isinstance(s, AugmentationSpec) for s in value):
            raise ArgumentError('augmentation must be a pair of AugmentationSpec, got {!r}'.format(value))

    def to_dict(self):
        """
        Render as the run-config JSON document.
        """
        first, second = self.augmentation
        return {
            'k': self.k,
            'tau1': self.tau1,
            'tau2': self.tau2,
            'gamma': self.gamma,
            'lr': self.lr,
            'pretrain_lr': self.pretrain_lr,
            't_max': self.t_max,
            'pretrain_steps': self.pretrain_steps,
            'head_warmup_steps': self.head_warmup_steps,
            'label_refresh_period': self.label_refresh_period,
            'widths': attr.asdict(self.widths),
            'augmentation': {
                'edge_drop': [first.edge_drop_rate, second.edge_drop_rate],
                'attr_mask': [first.attr_mask_rate, second.attr_mask_rate],
                'cap': [first.prob_cap, second.prob_cap],
                'adaptive': [first.adaptive, second.adaptive],
            },
            'seed': self.seed,
            'ablation': attr.asdict(self.ablation),
            'init_labels': self.init_labels,
            'linear_second_layer': self.linear_second_layer,
            'exclude_self_in_ccl': self.exclude_self_in_ccl,
            'literal_reg_sign': self.literal_reg_sign,
        }

    @classmethod
    def from_dict(cls, doc):
        """
        Parse a run-config document. Absent keys take their defaults.

        :raises ArgumentError: on unknown keys or invalid values.
        """
        doc = dict(doc)
        known = set(attr.fields_dict(cls))
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ArgumentError('unknown config keys: {}'.format(', '.join(unknown)))
        if 'widths' in doc:
            doc['widths'] = _sub_record(ModelWidths, doc['widths'], 'widths')
        if 'ablation' in doc:
            doc['ablation'] = _sub_record(Ablation, doc['ablation'], 'ablation')
        if 'augmentation' in doc:
            doc['augmentation'] = _augmentation_from_dict(doc['augmentation'])
        if 'k' not in doc:
            raise ArgumentError('the cluster count k is required')
        try:
            return cls(**doc)
        except TypeError as e:
            raise ArgumentError(str(e))


def _sub_record(record_cls, value, name):
    if isinstance(value, record_cls):
        return value
    if not isinstance(value, dict):
        raise ArgumentError('{} must be an object, got {!r}'.format(name, value))
    unknown = sorted(set(value) - set(attr.fields_dict(record_cls)))
    if unknown:
        raise ArgumentError('unknown {} keys: {}'.format(name, ', '.join(unknown)))
    return record_cls(**value)


def _augmentation_from_dict(value):
    if isinstance(value, (tuple, list)) and all(isinstance(s, AugmentationSpec) for s in value):
        return tuple(value)
    if not isinstance(value, dict):
        raise ArgumentError('augmentation must be an object, got {!r}'.format(value))
    unknown = sorted(set(value) - {'edge_drop', 'attr_mask', 'cap', 'adaptive'})
    if unknown:
        raise ArgumentError('unknown augmentation keys: {}'.format(', '.join(unknown)))
    edge_drop = _per_view(value.get('edge_drop', 0.3), 'edge_drop')
    attr_mask = _per_view(value.get('attr_mask', 0.3), 'attr_mask')
    cap = _per_view(value.get('cap', DEFAULT_PROB_CAP), 'cap')
    adaptive = _per_view(value.get('adaptive', True), 'adaptive')
    return tuple(
        AugmentationSpec(edge_drop_rate=e, attr_mask_rate=m, prob_cap=c, adaptive=a)
        for e, m, c, a in zip(edge_drop, attr_mask, cap, adaptive)
    )


def _per_view(value, name):
    # A scalar applies to both views.
    if isinstance(value, (bool, int, float)):
        return (value, value)
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ArgumentError('{} must be a scalar or one value per view, got {!r}'.format(name, value))
    return tuple(value)
