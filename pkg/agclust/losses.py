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
Training objectives.

Every loss accepts either recorded `~agclust.diffmath.Var` operands (the
result can then be back-propagated) or plain arrays, which are placed on
a fresh tape.
"""

import logging

import attr
import numpy as np

from . import diffmath as dm
from .common import LOG_EPS, ArgumentError, ContractViolation, _as_label_vector
from .diffmath import Tape, Var

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())


@attr.s(frozen=True, eq=False)
class ClusterIndexSets(object):
    """
    Pseudo-label neighbourhoods.

    :ivar labels: Hard pseudo labels, int64 vector.
    :ivar same_cluster:
        Tuple whose entry *i* is the sorted array of nodes sharing node
        *i*'s label, *i* included.
    """
    labels = attr.ib()
    same_cluster = attr.ib()

    @property
    def n_nodes(self):
        return self.labels.shape[0]

    @property
    def sizes(self):
        return np.array([s.shape[0] for s in self.same_cluster], dtype=np.int64)

    def membership(self):
        """
        Boolean ``(N, N)`` matrix, true where two nodes share a label.
        """
        return self.labels[:, None] == self.labels[None, :]


def build_cluster_sets(hard):
    labels = _as_label_vector(hard, 'hard')
    members = {}
    for label in np.unique(labels):
        members[label] = np.flatnonzero(labels == label)
    return ClusterIndexSets(labels, tuple(members[label] for label in labels))


@attr.s(frozen=True, eq=False)
class LossComponents(object):
    """
    :ivar total: Scalar `Var` to back-propagate.
    :ivar sgc: Pseudo-label (or plain NT-Xent) contrastive term.
    :ivar cc: Cluster contrastive term, ``None`` when disabled.
    :ivar reg: Regularizer R before scaling by gamma, ``None`` when disabled.
    """
    total = attr.ib()
    sgc = attr.ib()
    cc = attr.ib(default=None)
    reg = attr.ib(default=None)

    def values(self):
        """
        Float value of every component; disabled terms report 0.
        """
        return {
            name: 0.0 if var is None else var.item()
            for name, var in (('total', self.total), ('sgc', self.sgc), ('cc', self.cc), ('reg', self.reg))
        }


def _on_tape(*operands):
    for x in operands:
        if isinstance(x, Var):
            tape = x.tape
            break
    else:
        tape = Tape()
    return [tape.lift(x) for x in operands]


def _check_tau(name, tau):
    if not tau > 0:
        raise ArgumentError('{}={!r} must be positive'.format(name, tau))


def _check_views(a, b, what):
    if a.value.ndim != 2 or a.shape != b.shape:
        raise ContractViolation('{}: view shapes differ: {} vs {}'.format(what, a.shape, b.shape))


def _paired_contrast(a, b, tau, include_self):
    """
    Mean over the ``2n`` rows of ``[a; b]`` of
    ``−log(exp(s(r, partner)/τ) / Σ_c exp(s(r, c)/τ))``, where row *r*'s
    partner is the same index in the other block and *c* runs over every
    row (every row but *r* itself unless *include_self*).
    """
    n = a.shape[0]
    instances = dm.concat_rows([a, b])
    sim = dm.cosine_sim_matrix(instances, instances) / tau
    eye = np.eye(2 * n, dtype=bool)
    row_lse = dm.logsumexp(sim, axis=1, mask=None if include_self else ~eye)
    partner = np.roll(np.eye(2 * n), n, axis=1)
    positives = dm.sum(sim * partner)
    return (dm.sum(row_lse) - positives) / (2.0 * n)


def ssc_loss(m1, m2, sets, tau2):
    """
    Pseudo-label supervised contrastive loss, summed over nodes.

    For anchor *i* every instance of every node sharing its label is a
    positive, across all four view pairings, except the anchor compared
    with itself in the same view. The denominator of node *i* pools the
    similarities of both of its instances to every instance of every
    other node.
    """
    _check_tau('tau2', tau2)
    m1, m2 = _on_tape(m1, m2)
    _check_views(m1, m2, 'ssc_loss')
    n = m1.shape[0]
    if n < 2:
        raise ArgumentError('ssc_loss needs at least 2 nodes, got {}'.format(n))
    if sets.n_nodes != n:
        raise ContractViolation('cluster sets cover {} nodes, views have {}'.format(sets.n_nodes, n))

    instances = dm.concat_rows([m1, m2])
    sim = dm.cosine_sim_matrix(instances, instances) / tau2
    other_nodes = ~np.tile(np.eye(n, dtype=bool), (2, 2))
    row_lse = dm.logsumexp(sim, axis=1, mask=other_nodes)
    log_denominator = dm.logsumexp(dm.reshape(row_lse, (2, n)), axis=0)

    sizes = sets.sizes.astype(np.float64)
    weights = np.tile(sets.membership() / sizes[:, None], (2, 2))
    np.fill_diagonal(weights, 0.0)
    n_positive = (4.0 * sizes - 2.0) / sizes
    return dm.sum(log_denominator * n_positive) - dm.sum(sim * weights)


def ntxent_loss(m1, m2, tau):
    """
    NT-Xent over the ``2N`` instances: each instance's positive is the same
    node in the other view, the remaining ``2N − 2`` are negatives.
    """
    _check_tau('tau', tau)
    m1, m2 = _on_tape(m1, m2)
    _check_views(m1, m2, 'ntxent_loss')
    if m1.shape[0] < 2:
        raise ArgumentError('ntxent_loss needs at least 2 nodes, got {}'.format(m1.shape[0]))
    return _paired_contrast(m1, m2, tau, include_self=False)


def cc_loss(soft1, soft2, tau1, exclude_self=False):
    """
    Cluster-level contrast between the columns of the two soft assignments.

    Column *k* of one view is paired with column *k* of the other; every
    column of both views enters the denominator, the anchor column itself
    included unless *exclude_self*.
    """
    _check_tau('tau1', tau1)
    soft1, soft2 = _on_tape(soft1, soft2)
    _check_views(soft1, soft2, 'cc_loss')
    return _paired_contrast(dm.transpose(soft1), dm.transpose(soft2), tau1, include_self=not exclude_self)


def regularizer(soft1, soft2, literal_sign=False):
    """
    ``Σ_v Σ_k ρ_k log(ρ_k + ε)`` where ``ρ_k`` is the share of assignment
    mass held by cluster *k* in view *v*. Minimal at balanced clusters.

    :param bool literal_sign: Negate, so that minimizing favours collapse.
    """
    soft1, soft2 = _on_tape(soft1, soft2)
    _check_views(soft1, soft2, 'regularizer')
    total = None
    for soft in (soft1, soft2):
        mass = dm.sum(soft, axis=0) / dm.sum(soft)
        term = dm.sum(mass * dm.log(mass + LOG_EPS))
        total = term if total is None else total + term
    return -total if literal_sign else total


def loss_components(m1, m2, soft1, soft2, sets, cfg):
    """
    Evaluate each term of the training objective under *cfg*'s ablation.

    *soft1* and *soft2* may be ``None`` when ``cfg.ablation.no_ccm`` is set.

    :returns: `LossComponents`
    """
    m1, m2 = _on_tape(m1, m2)
    if cfg.ablation.no_ssc:
        sgc = ntxent_loss(m1, m2, cfg.tau2)
    else:
        sgc = ssc_loss(m1, m2, sets, cfg.tau2)
    if cfg.ablation.no_ccm:
        return LossComponents(sgc, sgc)
    soft1, soft2 = m1.tape.lift(soft1), m1.tape.lift(soft2)
    cc = cc_loss(soft1, soft2, cfg.tau1, exclude_self=cfg.exclude_self_in_ccl)
    reg = regularizer(soft1, soft2, literal_sign=cfg.literal_reg_sign)
    return LossComponents(sgc + cc + reg * cfg.gamma, sgc, cc, reg)


def total_loss(m1, m2, soft1, soft2, sets, cfg):
    """
    ``L_SGC + L_CC + γR``, honouring ``cfg.ablation``.
    """
    return loss_components(m1, m2, soft1, soft2, sets, cfg).total
