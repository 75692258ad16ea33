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
The ``agclust`` command.

Subcommands::

    agclust synth     sample an attributed SBM graph
    agclust train     train a model, write checkpoint, labels and history
    agclust predict   label a graph with a trained checkpoint
    agclust eval      score predicted labels against ground truth
    agclust baseline  k-means on the raw attributes

Exit status is 0 on success, 2 for usage or input errors and 3 when
training produced a non-finite value.
"""

import argparse
import logging
import os
import sys

import attr

from . import __version__, codec
from .common import ArgumentError, ClusteringError, NumericError, TrainConfig
from .graph import (
    ATTRS_FILE, EDGES_FILE, GRAPH_FILE, LABELS_FILE, generate_sbm, load_graph,
    load_graph_json, save_graph, save_graph_files,
)
from .metrics import METRIC_NAMES, evaluate, kmeans
from .model import dump_checkpoint, load_checkpoint, predict_oos
from .trainer import run_repeats, train

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

LOG_FORMAT = '%(asctime)s %(levelname)8s %(name)s: %(message)s'

CHECKPOINT_FILE = 'checkpoint.json'
HISTORY_FILE = 'history.csv'
CONFIG_FILE = 'config.json'
METRICS_FILE = 'metrics.json'
MANIFEST_FILE = 'manifest.json'
REPEATS_FILE = 'repeats.json'

# Run-config keys that are not TrainConfig fields.
_PATH_KEYS = ('graph', 'edges', 'attrs', 'labels', 'out', 'repeats')

# Flag destination -> TrainConfig key, for flags that map one to one.
_TRAIN_FLAGS = (
    'k', 'tau1', 'tau2', 'gamma', 'lr', 'pretrain_lr', 't_max', 'pretrain_steps', 'head_warmup_steps',
    'label_refresh_period', 'seed', 'init_labels', 'linear_second_layer',
    'exclude_self_in_ccl', 'literal_reg_sign',
)


def format_metrics(metrics):
    """
    Render metrics as a JSON object with four decimals per value.
    """
    return '{' + ', '.join(
        '"{}": {:.4f}'.format(name, metrics[name]) for name in METRIC_NAMES if name in metrics
    ) + '}'


@attr.s(frozen=True)
class RunConfig(object):
    """
    Everything one ``train`` invocation needs.

    :ivar train: `~agclust.common.TrainConfig`.
    :ivar graph: Path of a graph JSON document, or ``None``.
    :ivar edges: Edge-list path (with *attrs*), used when *graph* is ``None``.
    :ivar labels: Optional ground-truth labels path.
    :ivar int repeats: Number of seeds to summarize in ``repeats.json``.
    """
    train = attr.ib()
    out = attr.ib()
    graph = attr.ib(default=None)
    edges = attr.ib(default=None)
    attrs = attr.ib(default=None)
    labels = attr.ib(default=None)
    repeats = attr.ib(default=1)

    @repeats.validator
    def _check_repeats(self, attribute, value):
        if not isinstance(value, int) or value < 1:
            raise ArgumentError('repeats={!r} must be a positive integer'.format(value))

    @classmethod
    def from_sources(cls, doc, overrides):
        """
        Merge a config document with flag *overrides*; overrides win.

        :param dict doc: Parsed ``--config`` JSON, or ``{}``.
        :param dict overrides: Keys present only for flags actually given.
        :raises ArgumentError: on unknown keys or invalid values.
        """
        if not isinstance(doc, dict):
            raise ArgumentError('the config document must be a JSON object')
        merged = dict(doc)
        augmentation = dict(merged.get('augmentation') or {})
        augmentation.update(overrides.pop('augmentation', {}))
        if augmentation:
            merged['augmentation'] = augmentation
        ablation = dict(merged.get('ablation') or {})
        ablation.update(overrides.pop('ablation', {}))
        if ablation:
            merged['ablation'] = ablation
        merged.update(overrides)
        paths = {key: merged.pop(key) for key in _PATH_KEYS if key in merged}
        if paths.get('out') is None:
            raise ArgumentError('an output directory (--out) is required')
        if paths.get('graph') is None and (paths.get('edges') is None or paths.get('attrs') is None):
            raise ArgumentError('give either --graph or both --edges and --attrs')
        return cls(train=TrainConfig.from_dict(merged), **paths)

    def to_dict(self):
        doc = self.train.to_dict()
        doc.update({key: getattr(self, key) for key in _PATH_KEYS})
        return doc


def _read_graph(args_or_config, labels=None):
    if args_or_config.graph is not None:
        graph = load_graph_json(args_or_config.graph)
        if labels is not None:
            graph = attr.evolve(graph, true_labels=codec.read_labels(labels))
        return graph
    if args_or_config.edges is None or args_or_config.attrs is None:
        raise ArgumentError('give either --graph or both --edges and --attrs')
    return load_graph(args_or_config.edges, args_or_config.attrs, labels)


def _emit(stream, text):
    stream.write(text + '\n')
    stream.flush()


def cmd_synth(args, stdout):
    graph = generate_sbm(args.n, args.k, args.p_in, args.p_out, args.attr_dim, args.sep, args.noise_sd, args.seed)
    os.makedirs(args.out, exist_ok=True)
    paths = save_graph_files(graph, args.out)
    paths['graph'] = os.path.join(args.out, GRAPH_FILE)
    save_graph(graph, paths['graph'])
    codec.write_json(os.path.join(args.out, MANIFEST_FILE), {
        'params': {
            'n': args.n, 'k': args.k, 'p_in': args.p_in, 'p_out': args.p_out,
            'attr_dim': args.attr_dim, 'sep': args.sep, 'noise_sd': args.noise_sd, 'seed': args.seed,
        },
        'files': {name: os.path.basename(path) for name, path in paths.items()},
        'n_edges': graph.n_edges,
    })
    log.info('wrote %r to %s', graph, args.out)
    return EXIT_OK


def _train_overrides(args):
    overrides = {}
    for name in _TRAIN_FLAGS + _PATH_KEYS:
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.edge_drop is not None:
        overrides.setdefault('augmentation', {})['edge_drop'] = args.edge_drop
    if args.attr_mask is not None:
        overrides.setdefault('augmentation', {})['attr_mask'] = args.attr_mask
    if args.ablation is not None:
        overrides['ablation'] = {
            'no_ccm': args.ablation == 'no-ccm',
            'no_ssc': args.ablation == 'no-ssc',
        }
    return overrides


def cmd_train(args, stdout):
    doc = codec.read_json(args.config) if args.config is not None else {}
    config = RunConfig.from_sources(doc, _train_overrides(args))
    graph = _read_graph(config, config.labels)
    os.makedirs(config.out, exist_ok=True)
    codec.write_json(os.path.join(config.out, CONFIG_FILE), config.to_dict())

    params, labels, history = train(graph, config.train)
    dump_checkpoint(os.path.join(config.out, CHECKPOINT_FILE), params)
    codec.write_labels(os.path.join(config.out, LABELS_FILE), labels)
    codec.write_history_csv(os.path.join(config.out, HISTORY_FILE), history)
    if graph.true_labels is not None:
        metrics = evaluate(labels, graph.true_labels)
        text = format_metrics(metrics)
        with open(os.path.join(config.out, METRICS_FILE), 'w', encoding='utf-8') as f:
            f.write(text + '\n')
        _emit(stdout, text)
    if config.repeats > 1:
        seeds = [config.train.seed + i for i in range(config.repeats)]
        codec.write_json(os.path.join(config.out, REPEATS_FILE), run_repeats(graph, config.train, seeds))
    return EXIT_OK


def cmd_predict(args, stdout):
    params = load_checkpoint(args.checkpoint)
    graph = _read_graph(args)
    labels = predict_oos(graph, params)
    codec.write_labels(args.out, labels)
    log.info('wrote %d labels to %s', labels.shape[0], args.out)
    return EXIT_OK


def cmd_eval(args, stdout):
    metrics = evaluate(codec.read_labels(args.pred), codec.read_labels(args.truth))
    text = format_metrics(metrics)
    if args.out is not None:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    _emit(stdout, text)
    return EXIT_OK


def cmd_baseline(args, stdout):
    graph = _read_graph(args, args.labels)
    if graph.true_labels is None:
        raise ArgumentError('baseline needs ground-truth labels (--labels or a labelled --graph)')
    k = args.k if args.k is not None else graph.n_clusters
    labels = kmeans(graph.attributes, k, args.seed).labels
    text = format_metrics(evaluate(labels, graph.true_labels))
    if args.out is not None:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    _emit(stdout, text)
    return EXIT_OK


def _add_graph_inputs(parser, with_labels):
    parser.add_argument('--graph', help='graph JSON document ({})'.format(GRAPH_FILE))
    parser.add_argument('--edges', help='edge list ({})'.format(EDGES_FILE))
    parser.add_argument('--attrs', help='attribute CSV ({})'.format(ATTRS_FILE))
    if with_labels:
        parser.add_argument('--labels', help='ground-truth labels ({})'.format(LABELS_FILE))


def _flag(parser, name, **kwargs):
    # None marks "not given" so that config-file values survive.
    parser.add_argument(name, default=None, **kwargs)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='agclust',
        description='Contrastive clustering of attributed graphs.',
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument('--version', action='version', version='%(prog)s ' + __version__)
    parser.add_argument('-v', '--verbose', action='store_true', help='log at DEBUG level')
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    synth = commands.add_parser('synth', help='sample an attributed SBM graph',
                                formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    synth.add_argument('--n', type=int, default=150, help='number of nodes')
    synth.add_argument('--k', type=int, default=3, help='number of blocks')
    synth.add_argument('--p-in', type=float, default=0.3, help='intra-block edge probability')
    synth.add_argument('--p-out', type=float, default=0.02, help='inter-block edge probability')
    synth.add_argument('--attr-dim', type=int, default=16, help='attribute dimension')
    synth.add_argument('--sep', type=float, default=5.0, help='distance between block attribute means')
    synth.add_argument('--noise-sd', type=float, default=1.0, help='attribute noise standard deviation')
    synth.add_argument('--seed', type=int, default=0, help='random seed')
    synth.add_argument('--out', required=True, help='output directory')
    synth.set_defaults(func=cmd_synth)

    tr = commands.add_parser('train', help='train a model')
    tr.add_argument('--config', help='run-config JSON; flags override its values')
    _add_graph_inputs(tr, with_labels=True)
    _flag(tr, '--out', help='output directory')
    _flag(tr, '--k', type=int, help='number of clusters')
    _flag(tr, '--tau1', type=float, help='cluster contrast temperature (default 0.5)')
    _flag(tr, '--tau2', type=float, help='node contrast temperature (default 0.5)')
    _flag(tr, '--gamma', type=float, help='regularizer weight (default 1.0)')
    _flag(tr, '--lr', type=float, help='main-loop Adam learning rate (default 1e-4)')
    _flag(tr, '--pretrain-lr', type=float, help='pretraining and head warm-start learning rate (default 1e-3)')
    _flag(tr, '--t-max', type=int, help='training steps (default 400)')
    _flag(tr, '--pretrain-steps', type=int, help='pretraining steps (default 200)')
    _flag(tr, '--warmup-steps', dest='head_warmup_steps', type=int,
          help='clustering-head warm-start steps (default 100)')
    _flag(tr, '--refresh-period', dest='label_refresh_period', type=int,
          help='steps between pseudo-label refreshes (default 5)')
    _flag(tr, '--seed', type=int, help='master seed (default 0)')
    _flag(tr, '--init-labels', choices=('kmeans_on_m', 'forward_argmax'),
          help='pseudo-label initialization (default kmeans_on_m)')
    _flag(tr, '--edge-drop', type=float, nargs=2, metavar=('R1', 'R2'), help='edge drop rate per view')
    _flag(tr, '--attr-mask', type=float, nargs=2, metavar=('R1', 'R2'), help='attribute mask rate per view')
    _flag(tr, '--ablation', choices=('none', 'no-ccm', 'no-ssc'), help='disable a loss term')
    _flag(tr, '--linear-second-layer', action='store_const', const=True, help='no ReLU on the second GCN layer')
    _flag(tr, '--exclude-self-in-ccl', action='store_const', const=True,
          help='drop the anchor column from the cluster contrast denominator')
    _flag(tr, '--literal-reg-sign', action='store_const', const=True, help='negate the balance regularizer')
    _flag(tr, '--repeats', type=int, help='also train this many seeds and write repeats.json')
    tr.set_defaults(func=cmd_train)

    pr = commands.add_parser('predict', help='label a graph with a trained checkpoint')
    pr.add_argument('--checkpoint', required=True, help='checkpoint written by train')
    _add_graph_inputs(pr, with_labels=False)
    pr.add_argument('--out', required=True, help='labels file to write')
    pr.set_defaults(func=cmd_predict)

    ev = commands.add_parser('eval', help='score labels against ground truth')
    ev.add_argument('--pred', required=True, help='predicted labels')
    ev.add_argument('--truth', required=True, help='true labels')
    ev.add_argument('--out', help='also write the metrics JSON here')
    ev.set_defaults(func=cmd_eval)

    bl = commands.add_parser('baseline', help='k-means on the raw attributes',
                             formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_graph_inputs(bl, with_labels=True)
    bl.add_argument('--k', type=int, help='number of clusters (default: number of true classes)')
    bl.add_argument('--seed', type=int, default=0, help='random seed')
    bl.add_argument('--out', help='also write the metrics JSON here')
    bl.set_defaults(func=cmd_baseline)
    return parser


def _configure_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format=LOG_FORMAT,
        stream=sys.stderr,
    )


def main(argv=None, stdout=None):
    """
    Run the command line in *argv* and return the exit status.
    """
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    if stdout is None:
        stdout = sys.stdout
    try:
        return args.func(args, stdout)
    except NumericError as e:
        log.error('%s: numeric failure: %s', args.command, e)
        return EXIT_NUMERIC
    except (ClusteringError, OSError) as e:
        log.error('%s: %s', args.command, e)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
