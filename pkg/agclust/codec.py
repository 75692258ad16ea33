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
Readers and writers for every file format agclust exchanges.

Text formats:

- edge list: one ``u v`` pair of 0-indexed integers per line
- attributes: CSV without header, one row per node
- labels: one integer per line
- history: CSV with a header row

JSON documents (graph, checkpoint) carry ``format_version`` 1. Floats
are written with ``repr`` precision so that every round trip is exact.
"""

import csv
import json
import logging
import math

import numpy as np

from .common import FORMAT_VERSION, ParseError

log = logging.getLogger(__name__)
log.addHandler(logging.NullHandler())

HISTORY_COLUMNS = ('step', 'total', 'sgc', 'cc', 'reg', 'acc', 'nmi', 'ari', 'f1')


###################
#   Text files    #
###################


def read_edge_list(path):
    """
    :returns: ``(E, 2)`` int64 array, in file order.
    :raises ParseError: for lines that are not two integers.
    """
    pairs = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            fields = line.split()
            if not fields:
                continue
            if len(fields) != 2:
                raise ParseError('expected "u v", got {!r}'.format(line.strip()), path, lineno)
            try:
                pairs.append((int(fields[0]), int(fields[1])))
            except ValueError:
                raise ParseError('non-integer endpoint in {!r}'.format(line.strip()), path, lineno)
    return np.array(pairs, dtype=np.int64).reshape(-1, 2)


def write_edge_list(path, edges):
    with open(path, 'w', encoding='utf-8') as f:
        for u, v in edges:
            f.write('{:d} {:d}\n'.format(int(u), int(v)))


def read_attributes_csv(path):
    """
    :returns: ``(N, d)`` float64 array.
    :raises ParseError: for ragged rows, unparseable or non-finite values.
    """
    rows = []
    width = None
    with open(path, 'r', encoding='utf-8', newline='') as f:
        for lineno, record in enumerate(csv.reader(f), 1):
            if not record:
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError('row has {} columns, expected {}'.format(len(record), width), path, lineno)
            try:
                row = [float(x) for x in record]
            except ValueError as e:
                raise ParseError(str(e), path, lineno)
            if not all(math.isfinite(x) for x in row):
                raise ParseError('non-finite attribute value', path, lineno)
            rows.append(row)
    if not rows:
        raise ParseError('no attribute rows', path)
    return np.array(rows, dtype=np.float64)


def write_attributes_csv(path, attributes):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        for row in np.asarray(attributes, dtype=np.float64):
            writer.writerow([repr(float(x)) for x in row])


def read_labels(path):
    """
    :returns: int64 vector, one entry per non-blank line.
    :raises ParseError: for non-integer lines.
    """
    labels = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                labels.append(int(line))
            except ValueError:
                raise ParseError('label {!r} is not an integer'.format(line), path, lineno)
    return np.array(labels, dtype=np.int64)


def write_labels(path, labels):
    with open(path, 'w', encoding='utf-8') as f:
        for label in labels:
            f.write('{:d}\n'.format(int(label)))


def write_history_csv(path, history):
    """
    Write per-step training records; metrics absent at a step are blank.
    """
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(HISTORY_COLUMNS)
        for record in history:
            row = [record.step]
            for name in HISTORY_COLUMNS[1:]:
                value = getattr(record, name)
                row.append('' if value is None else repr(float(value)))
            writer.writerow(row)


def read_history_csv(path):
    """
    :returns: list of dicts keyed by column name; blank cells are ``None``.
    """
    out = []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        for row in csv.DictReader(f):
            out.append({
                k: (int(v) if k == 'step' else (None if v == '' else float(v)))
                for k, v in row.items()
            })
    return out


######################
#   JSON documents   #
######################


def read_json(path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except ValueError as e:
        raise ParseError('invalid JSON: {}'.format(e), path)


def write_json(path, doc):
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(doc, f, indent=1, sort_keys=True)
        f.write('\n')


def _check_version(doc, what):
    if not isinstance(doc, dict):
        raise ParseError('{} document must be an object'.format(what))
    version = doc.get('format_version')
    if version != FORMAT_VERSION:
        raise ParseError('unsupported {} format_version {!r}'.format(what, version))


def _matrix(value, what):
    try:
        arr = np.array(value, dtype=np.float64)
    except (TypeError, ValueError):
        raise ParseError('{} is not a numeric matrix'.format(what))
    if not np.all(np.isfinite(arr)):
        raise ParseError('{} has non-finite entries'.format(what))
    return arr


def graph_to_document(graph):
    return {
        'format_version': FORMAT_VERSION,
        'n': graph.n_nodes,
        'd': graph.attr_dim,
        'edges': graph.edges.tolist(),
        'attributes': graph.attributes.tolist(),
        'labels': None if graph.true_labels is None else graph.true_labels.tolist(),
    }


def graph_from_document(doc):
    """
    :returns: ``(attributes, edges, labels)`` ready for
        :meth:`~agclust.common.AttributedGraph.from_edges`.
    :raises ParseError: on a missing key, version or dimension mismatch.
    """
    _check_version(doc, 'graph')
    try:
        n, d = int(doc['n']), int(doc['d'])
        attributes = _matrix(doc['attributes'], 'attributes')
        edges = np.array(doc['edges'], dtype=np.int64).reshape(-1, 2)
        labels = doc['labels']
    except KeyError as e:
        raise ParseError('graph document lacks {}'.format(e))
    except (TypeError, ValueError) as e:
        raise ParseError('graph document is malformed: {}'.format(e))
    if attributes.shape != (n, d):
        raise ParseError('attributes do not match n={} d={}'.format(n, d))
    if labels is not None:
        labels = np.array(labels, dtype=np.int64)
    return attributes, edges, labels


def params_to_document(params):
    """
    Render a :class:`~agclust.model.ModelParams` as a checkpoint document.
    """
    def head(h):
        return {name: getattr(h, name).value.tolist() for name in ('w1', 'b1', 'w2', 'b2')}

    doc = {
        'format_version': FORMAT_VERSION,
        'dims': params.dims(),
        'omega1': params.encoder.omega1.value.tolist(),
        'omega2': params.encoder.omega2.value.tolist(),
        'phi': head(params.heads.phi),
        'psi': head(params.heads.psi),
    }
    if params.centroids is not None:
        doc['centroids'] = np.asarray(params.centroids).tolist()
    return doc


def params_from_document(doc):
    """
    :returns: ``(dims, arrays)`` where *arrays* maps ``omega1``,
        ``omega2``, ``phi.w1`` ... ``psi.b2`` to float64 arrays, plus
        ``centroids`` when the document carries them.
    """
    _check_version(doc, 'checkpoint')
    arrays = {}
    try:
        dims = dict(doc['dims'])
        for name in ('omega1', 'omega2'):
            arrays[name] = _matrix(doc[name], name)
        for head in ('phi', 'psi'):
            for name in ('w1', 'b1', 'w2', 'b2'):
                key = '{}.{}'.format(head, name)
                arrays[key] = _matrix(doc[head][name], key)
        if doc.get('centroids') is not None:
            arrays['centroids'] = _matrix(doc['centroids'], 'centroids')
    except KeyError as e:
        raise ParseError('checkpoint lacks {}'.format(e))
    except (TypeError, ValueError) as e:
        raise ParseError('checkpoint is malformed: {}'.format(e))
    return dims, arrays
