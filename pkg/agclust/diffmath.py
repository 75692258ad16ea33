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
Reverse-mode differentiation over a recorded operation tape.

A `Tape` records each primitive as it runs: the forward value, the parent
records and a closure mapping the output adjoint to parent adjoints.
`Tape.backward()` walks the records in reverse, accumulating adjoints,
and adds the adjoints of watched `ParamTensor` leaves into their ``grad``.

    tape = Tape()
    w = tape.watch(param)
    loss = dm.sum(dm.relu(x @ w))
    tape.backward(loss)
    adam_step([param], state, lr=1e-3)

Every value is double precision. Any primitive that produces a non-finite
value raises :exc:`~agclust.common.NumericError` immediately.
"""

import logging

import attr
import numpy as np
from scipy import sparse
from scipy.special import logsumexp as _sp_logsumexp

from ._util import _check_finite
from .common import COSINE_EPS, ArgumentError, ContractViolation, NumericError

_log = logging.getLogger(__name__)
_log.addHandler(logging.NullHandler())

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


def _as_float_array(value):
    return np.array(value, dtype=np.float64)


@attr.s(eq=False, repr=False)
class ParamTensor(object):
    """
    A trainable matrix and its accumulated gradient.

    :ivar value: ``float64`` array. Mutated in place by `adam_step()`.
    :ivar grad: Array shaped like *value*.
    :ivar str name: Label used in log messages and checkpoints.
    """
    value = attr.ib(converter=_as_float_array)
    name = attr.ib(default='', kw_only=True)
    grad = attr.ib(default=None, kw_only=True)

    def __attrs_post_init__(self):
        if not np.all(np.isfinite(self.value)):
            raise NumericError('parameter {} is not finite'.format(self.name or '?'))
        if self.grad is None:
            self.grad = np.zeros_like(self.value)
        else:
            self.grad = _as_float_array(self.grad)
            if self.grad.shape != self.value.shape:
                raise ContractViolation('grad shape {} != value shape {}'.format(self.grad.shape, self.value.shape))

    @property
    def shape(self):
        return self.value.shape

    def zero_grad(self):
        self.grad[...] = 0.0

    def copy(self):
        return ParamTensor(self.value.copy(), name=self.name)

    def __repr__(self):
        return '<ParamTensor {} {}>'.format(self.name or '?', 'x'.join(str(s) for s in self.shape))


class Var(object):
    """
    Handle to one value recorded on a `Tape`.

    Arithmetic operators record onto the same tape; plain numbers and
    arrays are lifted to constants.
    """
    __slots__ = ('tape', 'index', 'value')

    # Make ``ndarray <op> Var`` fall through to the reflected operators.
    __array_ufunc__ = None

    def __init__(self, tape, index, value):
        self.tape = tape
        self.index = index
        self.value = value

    @property
    def shape(self):
        return self.value.shape

    def item(self):
        if self.value.size != 1:
            raise ContractViolation('item() needs a single value, got shape {}'.format(self.shape))
        return float(self.value.reshape(()))

    def __repr__(self):
        return '<Var #{} {}>'.format(self.index, self.shape)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)


class Tape(object):
    """
    Ordered record of primitive applications for one forward pass.

    A tape is single-threaded. Use a fresh tape for each objective
    evaluation; records are never removed.
    """

    def __init__(self):
        self._values = []
        self._parents = []
        self._backward = []
        self._ops = []
        self._params = {}

    def __len__(self):
        return len(self._values)

    def record(self, op, value, parents, backward):
        """
        Append one primitive application.

        :param str op: Primitive name, for diagnostics.
        :param value: Forward value.
        :param parents: Tuple of parent `Var`.
        :param backward:
            Callable mapping the output adjoint to a tuple of parent adjoints
            (``None`` for a parent that receives nothing), or ``None`` for leaves.
        :raises NumericError: if *value* has a non-finite entry.
        """
        value = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(value)):
            raise NumericError('{} produced a non-finite value'.format(op))
        index = len(self._values)
        self._values.append(value)
        self._parents.append(tuple(p.index for p in parents))
        self._backward.append(backward)
        self._ops.append(op)
        return Var(self, index, value)

    def constant(self, value):
        return self.record('constant', value, (), None)

    def watch(self, param):
        """
        Record *param* as a leaf whose adjoint accumulates into ``param.grad``.
        """
        var = self.record('param', param.value, (), None)
        self._params[var.index] = param
        return var

    def lift(self, x):
        if isinstance(x, Var):
            if x.tape is not self:
                raise ContractViolation('operands are recorded on different tapes')
            return x
        return self.constant(x)

    def backward(self, output):
        """
        Back-propagate from the scalar *output*.

        Adjoints of watched parameters are added to their ``grad``; call
        `ParamTensor.zero_grad()` (or `adam_step()`) between passes.
        """
        output = self.lift(output)
        if output.value.size != 1:
            raise ContractViolation('backward() needs a scalar output, got shape {}'.format(output.shape))
        adjoints = [None] * (output.index + 1)
        adjoints[output.index] = np.ones_like(output.value)
        for index in range(output.index, -1, -1):
            grad = adjoints[index]
            if grad is None:
                continue
            adjoints[index] = None
            param = self._params.get(index)
            if param is not None:
                param.grad += grad
                continue
            backward = self._backward[index]
            if backward is None:
                continue
            for parent, parent_grad in zip(self._parents[index], backward(grad)):
                if parent_grad is None:
                    continue
                if adjoints[parent] is None:
                    adjoints[parent] = np.array(parent_grad, dtype=np.float64)
                else:
                    adjoints[parent] = adjoints[parent] + parent_grad


def _tape_of(*operands):
    for x in operands:
        if isinstance(x, Var):
            return x.tape
    raise ContractViolation('at least one operand must be recorded on a tape')


def _lift_all(*operands):
    tape = _tape_of(*operands)
    return tape, [tape.lift(x) for x in operands]


def _unbroadcast(grad, shape):
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ContractViolation('{}: shapes {} and {} do not broadcast'.format(op, a.shape, b.shape))


###########################
#   Elementwise algebra   #
###########################


def add(a, b):
    tape, (a, b) = _lift_all(a, b)
    _broadcast_shape('add', a, b)
    return tape.record('add', a.value + b.value, (a, b),
                       lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b):
    tape, (a, b) = _lift_all(a, b)
    _broadcast_shape('sub', a, b)
    return tape.record('sub', a.value - b.value, (a, b),
                       lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b):
    tape, (a, b) = _lift_all(a, b)
    _broadcast_shape('mul', a, b)
    return tape.record('mul', a.value * b.value, (a, b),
                       lambda g: (_unbroadcast(g * b.value, a.shape), _unbroadcast(g * a.value, b.shape)))


def div(a, b):
    tape, (a, b) = _lift_all(a, b)
    _broadcast_shape('div', a, b)
    with np.errstate(divide='ignore', invalid='ignore'):
        value = a.value / b.value

    def backward(g):
        return (_unbroadcast(g / b.value, a.shape),
                _unbroadcast(-g * a.value / (b.value * b.value), b.shape))
    return tape.record('div', value, (a, b), backward)


def neg(a):
    return a.tape.record('neg', -a.value, (a,), lambda g: (-g,))


def relu(a):
    """
    ``max(a, 0)``. The gradient at exactly 0 is 0.
    """
    active = a.value > 0.0
    return a.tape.record('relu', np.where(active, a.value, 0.0), (a,), lambda g: (g * active,))


def exp(a):
    with np.errstate(over='ignore'):
        value = np.exp(a.value)
    return a.tape.record('exp', value, (a,), lambda g: (g * value,))


def log(a):
    with np.errstate(divide='ignore', invalid='ignore'):
        value = np.log(a.value)
    return a.tape.record('log', value, (a,), lambda g: (g / a.value,))


def sum(a, axis=None, keepdims=False):  # noqa: A001
    value = np.sum(a.value, axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape),)
    return a.tape.record('sum', value, (a,), backward)


##############################
#   Shapes and linear maps   #
##############################


def matmul(a, b):
    tape, (a, b) = _lift_all(a, b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ContractViolation('matmul: cannot multiply {} by {}'.format(a.shape, b.shape))
    return tape.record('matmul', a.value @ b.value, (a, b),
                       lambda g: (g @ b.value.T, a.value.T @ g))


def spmm(matrix, b):
    """
    Multiply the constant sparse *matrix* by the recorded dense *b*.
    """
    if not sparse.issparse(matrix):
        raise ContractViolation('spmm: expected a sparse matrix, got {!r}'.format(type(matrix)))
    if b.value.ndim != 2 or matrix.shape[1] != b.shape[0]:
        raise ContractViolation('spmm: cannot multiply {} by {}'.format(matrix.shape, b.shape))
    transposed = matrix.T.tocsr()
    return b.tape.record('spmm', np.asarray(matrix @ b.value), (b,),
                         lambda g: (np.asarray(transposed @ g),))


def transpose(a):
    return a.tape.record('transpose', a.value.T, (a,), lambda g: (g.T,))


def reshape(a, shape):
    return a.tape.record('reshape', a.value.reshape(shape), (a,), lambda g: (g.reshape(a.shape),))


def concat_rows(parts):
    """
    Stack 2-D operands vertically.
    """
    tape, parts = _lift_all(*parts)
    widths = {p.shape[1] for p in parts}
    if len(widths) != 1:
        raise ContractViolation('concat_rows: column counts differ: {}'.format(sorted(widths)))
    bounds = np.cumsum([p.shape[0] for p in parts])[:-1]
    return tape.record('concat_rows', np.vstack([p.value for p in parts]), tuple(parts),
                       lambda g: tuple(np.split(g, bounds, axis=0)))


####################
#   Nonlinearity   #
####################


def row_softmax(a):
    shifted = a.value - a.value.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    value = e / e.sum(axis=1, keepdims=True)
    return a.tape.record('row_softmax', value, (a,),
                         lambda g: (value * (g - (g * value).sum(axis=1, keepdims=True)),))


def l2_normalize_rows(a, eps=COSINE_EPS):
    """
    Divide each row by ``max(‖row‖, eps)``; a zero row stays zero.
    """
    norms = np.sqrt((a.value * a.value).sum(axis=1, keepdims=True))
    active = norms > eps
    denom = np.where(active, norms, eps)
    value = a.value / denom

    def backward(g):
        radial = value * (g * value).sum(axis=1, keepdims=True)
        return ((g - active * radial) / denom,)
    return a.tape.record('l2_normalize_rows', value, (a,), backward)


def cosine_sim_matrix(a, b, eps=COSINE_EPS):
    """
    ``S[i, j]`` is the cosine similarity of row *i* of *a* and row *j* of *b*.
    """
    tape, (a, b) = _lift_all(a, b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ContractViolation('cosine_sim_matrix: rows of {} and {} are not comparable'.format(a.shape, b.shape))
    na = l2_normalize_rows(a, eps)
    nb = na if b is a else l2_normalize_rows(b, eps)
    return matmul(na, transpose(nb))


def logsumexp(a, axis=None, mask=None):
    """
    Overflow-safe ``log Σ exp(a)``, optionally over the entries where the
    boolean constant *mask* is true.
    """
    if mask is None:
        weights = np.ones(a.shape)
    else:
        weights = np.asarray(mask, dtype=np.float64)
        if weights.shape != a.shape:
            raise ContractViolation('logsumexp: mask shape {} != {}'.format(weights.shape, a.shape))
    with np.errstate(divide='ignore'):
        value = _sp_logsumexp(a.value, axis=axis, b=weights)

    def backward(g):
        full = value if axis is None else np.expand_dims(value, axis)
        grad = g if axis is None else np.expand_dims(g, axis)
        return (grad * weights * np.exp(a.value - full),)
    return a.tape.record('logsumexp', value, (a,), backward)


#########################
#   Gradient checking   #
#########################


def _objective_at(objective):
    out = objective(Tape())
    value = float(np.asarray(out.value if isinstance(out, Var) else out).reshape(()))
    return _check_finite('objective at a perturbed point', value)


def grad_check(objective, params, h=1e-5, seed=0, n_coords=50):
    """
    Compare reverse-mode gradients against central finite differences.

    :param objective:
        Callable taking a fresh `Tape`, watching *params* on it and returning
        a scalar `Var`.
    :param params: List of `ParamTensor`.
    :param float h: Difference step, within ``[1e-6, 1e-4]``.
    :param int n_coords: Coordinates sampled per parameter (all when fewer).

    :returns:
        The maximum over sampled coordinates of
        ``|g_ad - g_fd| / max(1, |g_ad|, |g_fd|)``.
    :raises NumericError: if the objective is non-finite at a perturbed point.
    """
    if not 1e-6 <= h <= 1e-4:
        raise ArgumentError('h={!r} must be within [1e-6, 1e-4]'.format(h))
    for p in params:
        p.zero_grad()
    tape = Tape()
    tape.backward(objective(tape))
    analytic = [p.grad.copy() for p in params]
    for p in params:
        p.zero_grad()

    rng = np.random.default_rng(seed)
    worst = 0.0
    for p, grad in zip(params, analytic):
        flat = p.value.reshape(-1)
        count = min(n_coords, flat.size)
        for coord in rng.choice(flat.size, size=count, replace=False):
            original = flat[coord]
            try:
                flat[coord] = original + h
                upper = _objective_at(objective)
                flat[coord] = original - h
                lower = _objective_at(objective)
            finally:
                flat[coord] = original
            fd = (upper - lower) / (2.0 * h)
            ad = grad.reshape(-1)[coord]
            err = abs(ad - fd) / max(1.0, abs(ad), abs(fd))
            if err > worst:
                worst = err
                _log.debug('grad_check: %r[%d] ad=%.10g fd=%.10g rel=%.3g', p, coord, ad, fd, err)
    return worst


############
#   Adam   #
############


@attr.s(eq=False)
class AdamState(object):
    """
    Per-parameter moment estimates, aligned with the parameter list passed
    to `adam_step()`.
    """
    first_moment = attr.ib()
    second_moment = attr.ib()
    step_count = attr.ib(default=0)
    beta1 = attr.ib(default=ADAM_BETA1)
    beta2 = attr.ib(default=ADAM_BETA2)
    eps = attr.ib(default=ADAM_EPS)

    @classmethod
    def for_params(cls, params, **kwargs):
        return cls(
            first_moment=[np.zeros_like(p.value) for p in params],
            second_moment=[np.zeros_like(p.value) for p in params],
            **kwargs
        )


def adam_step(params, state, lr):
    """
    Apply one bias-corrected Adam update and zero the gradients.

    :returns: ``(params, state)``, both updated in place.
    """
    if not lr > 0:
        raise ArgumentError('lr={!r} must be positive'.format(lr))
    if len(params) != len(state.first_moment):
        raise ContractViolation('{} parameters but state tracks {}'.format(len(params), len(state.first_moment)))
    state.step_count += 1
    bias1 = 1.0 - state.beta1 ** state.step_count
    bias2 = 1.0 - state.beta2 ** state.step_count
    for p, m, v in zip(params, state.first_moment, state.second_moment):
        if m.shape != p.shape:
            raise ContractViolation('moment shape {} != parameter shape {}'.format(m.shape, p.shape))
        g = p.grad
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p.value -= lr * (m / bias1) / (np.sqrt(v / bias2) + state.eps)
        if not np.all(np.isfinite(p.value)):
            raise NumericError('Adam update made {!r} non-finite'.format(p))
        p.zero_grad()
    return params, state
