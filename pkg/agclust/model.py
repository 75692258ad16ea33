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
The clustering network: a two-layer GCN encoder shared by both views, a
projection head producing the contrastive representation *M*, and a
clustering head producing the soft assignment *L̂*.

Functions without a ``tape`` argument evaluate on plain arrays and never
touch parameter gradients. The ``*_on_tape`` variants record onto a
:class:`~agclust.diffmath.Tape` for training.
"""

import logging

import attr
import numpy as np

from . import codec
from . import diffmath as dm
from .augment import raw_view
from .common import ContractViolation, ModelWidths, ParseError
from .diffmath import ParamTensor, Tape
from .metrics import nearest_centroid

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


@attr.s(eq=False)
class EncoderParams(object):
    """
    GCN weights Ω¹ ``(d, hidden)`` and Ω² ``(hidden, embed)``. No biases.
    """
    omega1 = attr.ib()
    omega2 = attr.ib()

    def parameters(self):
        return [self.omega1, self.omega2]


@attr.s(eq=False)
class DenseHead(object):
    """
    Two fully connected layers ``relu(Z W1 + b1) W2 + b2`` with a linear output.
    """
    w1 = attr.ib()
    b1 = attr.ib()
    w2 = attr.ib()
    b2 = attr.ib()

    def parameters(self):
        return [self.w1, self.b1, self.w2, self.b2]

    @property
    def out_dim(self):
        return self.w2.shape[1]


@attr.s(eq=False)
class HeadParams(object):
    """
    :ivar phi: Projection `DenseHead` (``embed → proj_hidden → proj_out``).
    :ivar psi: Clustering `DenseHead` (``embed → cluster_hidden → K``).
    """
    phi = attr.ib()
    psi = attr.ib()

    def parameters(self):
        return self.phi.parameters() + self.psi.parameters()


@attr.s(eq=False)
class ModelParams(object):
    """
    Every trainable tensor of the network.

    Unpacks as ``encoder, heads = params``.

    :ivar centroids:
        ``(K, proj_out)`` k-means centroids in projection space, or ``None``.
        When set, hard labels come from the nearest centroid of *M* rather
        than from the clustering head; a run without the cluster terms
        stores them here. Not trained.
    """
    encoder = attr.ib()
    heads = attr.ib()
    linear_second_layer = attr.ib(default=False)
    centroids = attr.ib(default=None)

    def __iter__(self):
        return iter((self.encoder, self.heads))

    def parameters(self):
        """
        All tensors in a fixed order: Ω¹, Ω², φ, ψ.
        """
        return self.encoder.parameters() + self.heads.parameters()

    @property
    def attr_dim(self):
        return self.encoder.omega1.shape[0]

    @property
    def k(self):
        return self.heads.psi.out_dim

    def dims(self):
        return {
            'attr_dim': self.attr_dim,
            'hidden': self.encoder.omega1.shape[1],
            'embed': self.encoder.omega2.shape[1],
            'proj_hidden': self.heads.phi.w1.shape[1],
            'proj_out': self.heads.phi.out_dim,
            'cluster_hidden': self.heads.psi.w1.shape[1],
            'k': self.k,
            'linear_second_layer': bool(self.linear_second_layer),
        }

    def copy(self):
        return ModelParams(
            EncoderParams(*[p.copy() for p in self.encoder.parameters()]),
            HeadParams(DenseHead(*[p.copy() for p in self.heads.phi.parameters()]),
                       DenseHead(*[p.copy() for p in self.heads.psi.parameters()])),
            self.linear_second_layer,
            None if self.centroids is None else np.array(self.centroids),
        )


@attr.s(frozen=True, eq=False)
class ForwardOutputs(object):
    """
    :ivar z_bar: First GCN layer output Z̄, ``(N, hidden)``.
    :ivar z: Encoder output Z, ``(N, embed)``.
    :ivar m: Projection M, ``(N, proj_out)``.
    :ivar soft_assign: Row-stochastic ``(N, K)`` soft assignment L̂.
    """
    z_bar = attr.ib()
    z = attr.ib()
    m = attr.ib()
    soft_assign = attr.ib()


def _glorot(rng, fan_in, fan_out, name):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return ParamTensor(rng.uniform(-bound, bound, size=(fan_in, fan_out)), name=name)


def _dense_head(rng, dims, name):
    (d_in, d_hidden, d_out) = dims
    return DenseHead(
        _glorot(rng, d_in, d_hidden, name + '.w1'),
        ParamTensor(np.zeros((1, d_hidden)), name=name + '.b1'),
        _glorot(rng, d_hidden, d_out, name + '.w2'),
        ParamTensor(np.zeros((1, d_out)), name=name + '.b2'),
    )


def init_params(attr_dim, widths, k, seed, linear_second_layer=False):
    """
    Glorot-uniform weights, zero biases, deterministic per *seed*.

    :param widths: `ModelWidths`.
    :returns: `ModelParams` (unpacks as ``encoder, heads``).
    """
    if widths is None:
        widths = ModelWidths()
    for name, value in (('attr_dim', attr_dim), ('k', k)):
        if value < 1:
            raise ContractViolation('{}={} must be positive'.format(name, value))
    rng = np.random.default_rng(seed)
    encoder = EncoderParams(
        _glorot(rng, attr_dim, widths.hidden, 'omega1'),
        _glorot(rng, widths.hidden, widths.embed, 'omega2'),
    )
    heads = HeadParams(
        _dense_head(rng, (widths.embed, widths.proj_hidden, widths.proj_out), 'phi'),
        _dense_head(rng, (widths.embed, widths.cluster_hidden, k), 'psi'),
    )
    return ModelParams(encoder, heads, linear_second_layer)


def _check_view(view, encoder):
    if view.attributes.shape[1] != encoder.omega1.shape[0]:
        raise ContractViolation('graph has attr_dim={} but the encoder expects {}'.format(
            view.attributes.shape[1], encoder.omega1.shape[0]))


def encode_on_tape(tape, view, encoder, linear_second_layer=False):
    """
    Record ``Z̄ = relu(Â X Ω¹)`` and ``Z = relu(Â Z̄ Ω²)`` on *tape*.
    """
    _check_view(view, encoder)
    x = tape.constant(view.attributes)
    a_hat = view.normalized.matrix
    z_bar = dm.relu(dm.spmm(a_hat, x @ tape.watch(encoder.omega1)))
    z = dm.spmm(a_hat, z_bar @ tape.watch(encoder.omega2))
    if not linear_second_layer:
        z = dm.relu(z)
    return z_bar, z


def head_on_tape(tape, h, head):
    hidden = dm.relu(h @ tape.watch(head.w1) + tape.watch(head.b1))
    return hidden @ tape.watch(head.w2) + tape.watch(head.b2)


def head_input_on_tape(z):
    """
    Rescale every row of Z to norm ``sqrt(embed)``; a zero row stays zero.
    Both heads read this, so their inputs do not depend on graph size or degree.
    """
    return dm.l2_normalize_rows(z) * float(np.sqrt(z.shape[1]))


def head_input(z):
    z = np.asarray(z, dtype=np.float64)
    return head_input_on_tape(Tape().constant(z)).value


def forward_on_tape(tape, view, params, with_assign=True):
    """
    Run the network on one view, recording every step.

    :returns: `ForwardOutputs` holding `~agclust.diffmath.Var` handles;
        ``soft_assign`` is ``None`` when *with_assign* is false.
    """
    z_bar, z = encode_on_tape(tape, view, params.encoder, params.linear_second_layer)
    h = head_input_on_tape(z)
    m = head_on_tape(tape, h, params.heads.phi)
    soft = dm.row_softmax(head_on_tape(tape, h, params.heads.psi)) if with_assign else None
    return ForwardOutputs(z_bar, z, m, soft)


def encode(view, encoder, linear_second_layer=False):
    """
    :returns: ``(Z̄, Z)`` arrays.
    """
    z_bar, z = encode_on_tape(Tape(), view, encoder, linear_second_layer)
    return z_bar.value, z.value


def _head(z, head):
    tape = Tape()
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2 or z.shape[1] != head.w1.shape[0]:
        raise ContractViolation('head expects width {}, got shape {}'.format(head.w1.shape[0], z.shape))
    return tape, head_on_tape(tape, tape.constant(z), head)


def project(z, phi):
    """
    ``M = relu(Z W1 + b1) W2 + b2``.
    """
    return _head(z, phi)[1].value


def assign(z, psi):
    """
    Row softmax of the clustering-head logits.
    """
    tape, logits = _head(z, psi)
    return dm.row_softmax(logits).value


def discretize(soft):
    """
    Row-wise argmax; ties go to the smallest cluster index.
    """
    soft = np.asarray(soft)
    if soft.ndim != 2:
        raise ContractViolation('soft assignment must be 2-D, got shape {}'.format(soft.shape))
    return np.argmax(soft, axis=1).astype(np.int64)


def forward_raw(graph, params):
    """
    Evaluate the network on the unperturbed graph.

    :returns: `ForwardOutputs` of arrays.
    """
    outs = forward_on_tape(Tape(), raw_view(graph), params)
    return ForwardOutputs(outs.z_bar.value, outs.z.value, outs.m.value, outs.soft_assign.value)


def hard_labels(outs, params):
    """
    Hard labels from forward outputs: the nearest stored centroid of *M*
    when *params* carries centroids, else the clustering-head argmax.
    """
    if params.centroids is not None:
        return nearest_centroid(outs.m, params.centroids)
    return discretize(outs.soft_assign)


def predict_oos(new_graph, params):
    """
    Label a graph that was not seen during training, with one forward pass.

    :raises ContractViolation: when the attribute dimensions disagree.
    """
    if new_graph.attr_dim != params.attr_dim:
        raise ContractViolation('graph has attr_dim={} but the model was trained on {}'.format(
            new_graph.attr_dim, params.attr_dim))
    return hard_labels(forward_raw(new_graph, params), params)


def dump_checkpoint(path, params):
    codec.write_json(path, codec.params_to_document(params))


def load_checkpoint(path):
    """
    Restore parameters written by `dump_checkpoint()`; values round-trip bitwise.

    :raises ParseError: for malformed documents or inconsistent shapes.
    """
    try:
        dims, arrays = codec.params_from_document(codec.read_json(path))
    except ParseError as e:
        if e.path is None:
            e.path = path
        raise

    def tensor(name):
        return ParamTensor(arrays[name], name=name)

    def head(prefix):
        return DenseHead(*[tensor('{}.{}'.format(prefix, n)) for n in ('w1', 'b1', 'w2', 'b2')])

    params = ModelParams(
        EncoderParams(tensor('omega1'), tensor('omega2')),
        HeadParams(head('phi'), head('psi')),
        bool(dims.get('linear_second_layer', False)),
        arrays.get('centroids'),
    )
    expected = params.dims()
    if any(dims.get(key) != value for key, value in expected.items()):
        raise ParseError('checkpoint dims {} disagree with its tensors {}'.format(dims, expected), path)
    if params.centroids is not None and params.centroids.shape != (params.k, expected['proj_out']):
        raise ParseError('checkpoint centroids have shape {}, expected ({}, {})'.format(
            params.centroids.shape, params.k, expected['proj_out']), path)
    return params
