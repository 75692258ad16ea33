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
End-to-end training: contrastive pretraining, pseudo-label initialization,
a short cross-entropy warm start of the clustering head, then the joint
loop over pairs of sampled views with a periodic pseudo-label refresh.

Every random draw derives its seed from ``cfg.seed`` and its position in
the run, so ``(graph, cfg)`` fixes the outcome bit for bit.
"""

import logging

import attr
import numpy as np

from . import diffmath as dm
from . import losses
from ._util import _derive_seed
from .augment import sample_view
from .common import INIT_FORWARD_ARGMAX, ArgumentError, NumericError
from .diffmath import AdamState, Tape, adam_step
from .metrics import METRIC_NAMES, evaluate, kmeans_restarts
from .model import encode, forward_on_tape, forward_raw, hard_labels, head_input, head_on_tape, init_params

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

# Seed phases
PHASE_PRETRAIN = 0
PHASE_TRAIN = 1
PHASE_KMEANS = 2
PHASE_WARMUP = 3

KMEANS_ATTEMPTS = 10


@attr.s(frozen=True)
class HistoryRecord(object):
    """
    Loss components after one training step, plus clustering metrics at
    steps where the pseudo labels were refreshed against known ground truth.
    """
    step = attr.ib()
    total = attr.ib()
    sgc = attr.ib()
    cc = attr.ib()
    reg = attr.ib()
    acc = attr.ib(default=None)
    nmi = attr.ib(default=None)
    ari = attr.ib(default=None)
    f1 = attr.ib(default=None)


@attr.s(eq=False)
class TrainState(object):
    """
    :ivar params: `~agclust.model.ModelParams` being trained.
    :ivar adam: `~agclust.diffmath.AdamState` over ``params.parameters()``.
    :ivar pseudo_labels: Current hard pseudo labels.
    :ivar int step: Completed main-loop steps; equals ``len(history)``.
    """
    params = attr.ib()
    adam = attr.ib()
    pseudo_labels = attr.ib()
    step = attr.ib(default=0)
    history = attr.ib(default=attr.Factory(list))


def _view_pair(graph, cfg, phase, step):
    return [
        sample_view(graph, spec, _derive_seed(cfg.seed, phase, step, view))
        for view, spec in enumerate(cfg.augmentation)
    ]


def pretrain(graph, cfg, params=None, losses_out=None):
    """
    Minimize NT-Xent between the projections of two sampled views for
    ``cfg.pretrain_steps`` Adam steps. Only the encoder and the projection
    head are updated.

    :param params: Starting parameters; freshly initialized from
        ``cfg.seed`` when ``None``. Updated in place.
    :param list losses_out: If given, receives the loss of every step.
    :returns: the parameters.
    :raises NumericError: with the step index if the loss is non-finite.
    """
    if params is None:
        params = init_params(graph.attr_dim, cfg.widths, cfg.k, cfg.seed, cfg.linear_second_layer)
    trained = params.encoder.parameters() + params.heads.phi.parameters()
    adam = AdamState.for_params(trained)
    for step in range(cfg.pretrain_steps):
        try:
            tape = Tape()
            m1, m2 = [forward_on_tape(tape, view, params, with_assign=False).m
                      for view in _view_pair(graph, cfg, PHASE_PRETRAIN, step)]
            loss = losses.ntxent_loss(m1, m2, cfg.tau2)
            tape.backward(loss)
            adam_step(trained, adam, cfg.pretrain_lr)
        except NumericError as e:
            log.error('pretraining diverged at step %d: %s', step, e)
            raise NumericError('pretraining loss is not finite', step=step)
        log.debug('pretrain step %d: ntxent=%.6f', step, loss.item())
        if losses_out is not None:
            losses_out.append(loss.item())
    if cfg.pretrain_steps:
        log.info('pretraining finished after %d steps', cfg.pretrain_steps)
    return params


def _kmeans_on_projection(graph, params, cfg):
    m = forward_raw(graph, params).m
    seed = _derive_seed(cfg.seed, PHASE_KMEANS)
    return kmeans_restarts(m, cfg.k, seed, attempts=KMEANS_ATTEMPTS)


def fit_centroids(graph, params, cfg):
    """
    k-means on the projections of the raw graph. Stores the centroids on
    *params* so that `~agclust.model.predict_oos` reproduces the labels.

    :returns: the k-means labels.
    """
    result = _kmeans_on_projection(graph, params, cfg)
    params.centroids = result.centroids
    return result.labels


def init_pseudo_labels(graph, params, cfg):
    """
    Initial pseudo labels: k-means on the projections of the raw graph
    (``init_labels='kmeans_on_m'``) or the argmax of the clustering head
    (``'forward_argmax'``).

    :raises DegenerateClusteringError:
        if k-means leaves a cluster empty after every re-seed.
    """
    if cfg.init_labels == INIT_FORWARD_ARGMAX and not cfg.ablation.no_ccm:
        labels = refresh_pseudo_labels(graph, params)
    else:
        labels = _kmeans_on_projection(graph, params, cfg).labels
    log.info('initial pseudo-label cluster sizes: %s', np.bincount(labels, minlength=cfg.k).tolist())
    return labels


def warm_start_head(graph, params, labels, cfg, losses_out=None):
    """
    Fit the clustering head to *labels* by cross-entropy for
    ``cfg.head_warmup_steps`` Adam steps on sampled views, with the encoder
    frozen. Only ψ is updated.

    :param list losses_out: If given, receives the loss of every step.
    :returns: the parameters.
    :raises NumericError: with the step index if the loss is non-finite.
    """
    psi = params.heads.psi
    adam = AdamState.for_params(psi.parameters())
    targets = np.eye(cfg.k)[labels]
    n = graph.n_nodes
    for step in range(cfg.head_warmup_steps):
        spec = cfg.augmentation[step % 2]
        view = sample_view(graph, spec, _derive_seed(cfg.seed, PHASE_WARMUP, step))
        h = head_input(encode(view, params.encoder, params.linear_second_layer)[1])
        try:
            tape = Tape()
            logits = head_on_tape(tape, tape.constant(h), psi)
            loss = (dm.sum(dm.logsumexp(logits, axis=1)) - dm.sum(logits * targets)) / n
            tape.backward(loss)
            adam_step(psi.parameters(), adam, cfg.pretrain_lr)
        except NumericError as e:
            log.error('head warm start diverged at step %d: %s', step, e)
            raise NumericError('head warm-start loss is not finite', step=step)
        if losses_out is not None:
            losses_out.append(loss.item())
    if cfg.head_warmup_steps:
        agreement = np.mean(refresh_pseudo_labels(graph, params) == labels)
        log.info('head warm start finished after %d steps, %.1f%% of nodes match their pseudo label',
                 cfg.head_warmup_steps, 100.0 * agreement)
    return params


def refresh_pseudo_labels(graph, params):
    """
    Hard labels of the raw graph, exactly as `~agclust.model.predict_oos`
    computes them. Never touches *params*.
    """
    return hard_labels(forward_raw(graph, params), params)


class Trainer(object):
    """
    Drive one training run step by step.

    Constructing a `Trainer` runs pretraining, the pseudo-label
    initialization and the clustering-head warm start; `run` then executes
    the main loop.

    :ivar graph: The `~agclust.common.AttributedGraph` being clustered.
    :ivar cfg: The `~agclust.common.TrainConfig`.
    :ivar state: The live `TrainState`.
    """

    def __init__(self, graph, cfg, params=None):
        if cfg.k > graph.n_nodes:
            raise ArgumentError('k={} exceeds the {} nodes of the graph'.format(cfg.k, graph.n_nodes))
        self.graph = graph
        self.cfg = cfg
        params = pretrain(graph, cfg, params)
        if cfg.ablation.no_ccm:
            labels = fit_centroids(graph, params, cfg)
            log.info('initial pseudo-label cluster sizes: %s', np.bincount(labels, minlength=cfg.k).tolist())
        else:
            params.centroids = None
            labels = init_pseudo_labels(graph, params, cfg)
            warm_start_head(graph, params, labels, cfg)
        self.state = TrainState(
            params=params,
            adam=AdamState.for_params(self._trained_parameters(params)),
            pseudo_labels=labels,
        )

    def __repr__(self):
        return '<Trainer k={} step={}/{} on {!r}>'.format(
            self.cfg.k, self.state.step, self.cfg.t_max, self.graph)

    def _trained_parameters(self, params):
        if self.cfg.ablation.no_ccm:
            return params.encoder.parameters() + params.heads.phi.parameters()
        return params.parameters()

    def current_labels(self):
        """
        Hard labels of the raw graph under the current parameters.

        Without the cluster contrast the clustering head is never trained,
        so k-means on the projections stands in for it; its centroids are
        refitted and kept on the parameters.
        """
        if self.cfg.ablation.no_ccm:
            return fit_centroids(self.graph, self.state.params, self.cfg)
        return refresh_pseudo_labels(self.graph, self.state.params)

    def step(self):
        """
        Run one main-loop step and return its `HistoryRecord`.

        :raises NumericError:
            carrying the step number and whatever loss components were
            evaluated before a non-finite value appeared.
        """
        state, cfg = self.state, self.cfg
        step = state.step + 1
        with_assign = not cfg.ablation.no_ccm
        components = None
        try:
            tape = Tape()
            outs = [forward_on_tape(tape, view, state.params, with_assign=with_assign)
                    for view in _view_pair(self.graph, cfg, PHASE_TRAIN, step)]
            sets = losses.build_cluster_sets(state.pseudo_labels)
            components = losses.loss_components(
                outs[0].m, outs[1].m, outs[0].soft_assign, outs[1].soft_assign, sets, cfg)
            tape.backward(components.total)
            adam_step(self._trained_parameters(state.params), state.adam, cfg.lr)
        except NumericError:
            values = components.values() if components is not None else {}
            log.error('training diverged at step %d with components %r', step, values)
            raise NumericError('training loss is not finite', step=step, components=values)

        # state.step counts every applied update, even if the refresh below raises.
        values = components.values()
        record = HistoryRecord(step=step, **values)
        state.step = step
        state.history.append(record)
        log.debug('step %d: total=%.6f sgc=%.6f cc=%.6f reg=%.6f',
                  step, values['total'], values['sgc'], values['cc'], values['reg'])
        if step % cfg.label_refresh_period == 0:
            state.pseudo_labels = self.current_labels()
            log.info('step %d: refreshed pseudo labels, cluster sizes %s',
                     step, np.bincount(state.pseudo_labels, minlength=cfg.k).tolist())
            if self.graph.true_labels is not None:
                record = attr.evolve(record, **evaluate(state.pseudo_labels, self.graph.true_labels))
                state.history[-1] = record
        return record

    def run(self):
        """
        Step until ``cfg.t_max`` and extract the final labels.

        :returns: ``(params, labels, history)``; with no main-loop steps the
            labels are the initial pseudo labels.
        """
        while self.state.step < self.cfg.t_max:
            self.step()
        if self.state.step == 0:
            labels = self.state.pseudo_labels
        else:
            labels = self.current_labels()
        if self.graph.true_labels is not None:
            log.info('final metrics: %s', ' '.join(
                '{}={:.4f}'.format(name, value)
                for name, value in sorted(evaluate(labels, self.graph.true_labels).items())))
        return self.state.params, labels, self.state.history


def train(graph, cfg):
    """
    Pretrain, initialize pseudo labels and run ``cfg.t_max`` joint steps.

    :returns: ``(params, labels, history)``.
    """
    return Trainer(graph, cfg).run()


def run_repeats(graph, cfg, seeds):
    """
    Train once per seed and summarize the metrics against ground truth.

    :returns: dict with ``runs`` (one ``{seed, acc, nmi, ari, f1}`` per
        seed) and the per-metric ``mean`` and ``std`` over runs.
    :raises ArgumentError: if *graph* has no ground truth or *seeds* is empty.
    """
    if graph.true_labels is None:
        raise ArgumentError('repeated runs need ground-truth labels')
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ArgumentError('no seeds given')
    runs = []
    for seed in seeds:
        _, labels, _ = train(graph, attr.evolve(cfg, seed=seed))
        run = evaluate(labels, graph.true_labels)
        log.info('repeat seed=%d: %s', seed, run)
        runs.append(dict(run, seed=seed))
    table = np.array([[run[name] for name in METRIC_NAMES] for run in runs])
    return {
        'runs': runs,
        'mean': dict(zip(METRIC_NAMES, table.mean(axis=0).tolist())),
        'std': dict(zip(METRIC_NAMES, table.std(axis=0).tolist())),
    }
