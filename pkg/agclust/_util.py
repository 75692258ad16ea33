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

import numpy as np

from .common import ArgumentError, NumericError, _as_label_vector


def _derive_seed(*parts):
    """
    Derive an independent 32-bit seed from a tuple of non-negative integers.

    Used so that every sampled view, k-means restart, etc. is a pure
    function of the master seed and its position in the run.
    """
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1)[0])


def _coerce_label_pair(pred, truth):
    """
    Coerce two labelings to ``int64`` vectors of equal, non-zero length.

    :raises ArgumentError: when the lengths differ or either is empty
    """
    pred = _as_label_vector(pred, 'pred')
    truth = _as_label_vector(truth, 'truth')
    if pred.shape[0] != truth.shape[0]:
        raise ArgumentError('labelings differ in length: {} != {}'.format(pred.shape[0], truth.shape[0]))
    if pred.shape[0] == 0:
        raise ArgumentError('labelings are empty')
    return pred, truth


def _check_finite(what, value):
    """
    Raise `NumericError` unless every entry of *value* is finite.
    """
    if not np.all(np.isfinite(value)):
        raise NumericError('{} is not finite'.format(what))
    return value
