"""Reverse-mode tape over numpy arrays.

Every :class:`Var` holds a numpy value and remembers the vector-Jacobian
products that produced it.  A :class:`Tape` keeps nodes in recording order,
which is a valid topological order, so :func:`backward` simply walks it in
reverse.  Values are vectorised over collocation points; one node per array
operation keeps the Python overhead independent of the number of points.
"""

from __future__ import annotations

import numpy as np

from ..exceptions import PropagationError, UsageError


class Var:
    __slots__ = ("value", "tape", "index", "parents")

    def __init__(self, value, tape, parents=()):
        self.value = value
        self.tape = tape
        # parents: sequence of (Var, vjp) with vjp(upstream) -> contribution
        self.parents = parents
        self.index = tape._push(self)

    @property
    def shape(self):
        return np.shape(self.value)

    def __repr__(self):
        return f"Var(shape={self.shape}, index={self.index})"

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(other))

    def __rsub__(self, other):
        return add(neg(self), other)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return neg(self)

    def __truediv__(self, other):
        if isinstance(other, Var):
            raise UsageError("division by a tape variable is not supported")
        return mul(self, 1.0 / other)

    def __getitem__(self, key):
        return getitem(self, key)

    def __float__(self):
        return float(self.value)


class Tape:
    """Ordered record of the primitive operations of one evaluation."""

    def __init__(self):
        self.nodes: list[Var] = []
        self.param_leaf: Var | None = None

    def _push(self, var):
        self.nodes.append(var)
        return len(self.nodes) - 1

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def clear(self):
        """Drop the recorded nodes.

        Nodes and the tape reference each other, so without this their
        arrays wait for the cyclic garbage collector.
        """
        self.nodes = []
        self.param_leaf = None

    def leaf(self, value) -> Var:
        return Var(np.asarray(value, dtype=np.float64), self)

    def params(self, value) -> Var:
        """Register the flat trainable vector; :func:`backward` differentiates w.r.t. it."""
        if self.param_leaf is not None:
            raise UsageError("tape already has a parameter vector")
        self.param_leaf = self.leaf(np.array(value, dtype=np.float64, copy=True))
        return self.param_leaf


def backward(tape: Tape, output: Var, wrt: Var | None = None) -> np.ndarray:
    """Gradient of the scalar ``output`` with respect to ``wrt``.

    ``wrt`` defaults to the tape's registered parameter vector, so the result
    is aligned index for index with it.
    """
    if not isinstance(output, Var) or output.tape is not tape or tape.nodes[output.index] is not output:
        raise UsageError("output is not recorded on this tape")
    if np.size(output.value) != 1:
        raise UsageError(f"backward needs a scalar output, got shape {output.shape}")
    target = wrt if wrt is not None else tape.param_leaf
    if target is None:
        raise UsageError("no parameter vector registered on the tape and no wrt given")
    if target.tape is not tape:
        raise UsageError("wrt variable belongs to another tape")

    adjoints: dict[int, np.ndarray] = {output.index: np.ones_like(output.value)}
    for node in reversed(tape.nodes[target.index:output.index + 1]):
        g = adjoints.pop(node.index, None)
        if g is None:
            continue
        if node is target:
            adjoints[node.index] = g
            break
        for parent, vjp in node.parents:
            if parent.index < target.index:
                continue
            contrib = vjp(g)
            prev = adjoints.get(parent.index)
            adjoints[parent.index] = contrib if prev is None else prev + contrib
    grad = adjoints.get(target.index)
    if grad is None:
        return np.zeros_like(target.value)
    return np.asarray(grad, dtype=np.float64).reshape(np.shape(target.value))


# ---------------------------------------------------------------------------
# primitives

def _value(x):
    return x.value if isinstance(x, Var) else x


def _tape_of(*xs):
    for x in xs:
        if isinstance(x, Var):
            return x.tape
    return None


def _unbroadcast(g, shape):
    if np.shape(g) == tuple(shape):
        return g
    g = np.asarray(g)
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _check_finite(value, name):
    if not np.all(np.isfinite(value)):
        raise PropagationError(f"non-finite value produced by {name}")
    return value


def add(a, b):
    tape = _tape_of(a, b)
    out = _value(a) + _value(b)
    if tape is None:
        return out
    parents = []
    for x in (a, b):
        if isinstance(x, Var):
            shape = x.shape
            parents.append((x, lambda g, s=shape: _unbroadcast(g, s)))
    return Var(out, tape, parents)


def neg(a):
    if not isinstance(a, Var):
        return -a
    return Var(-a.value, a.tape, [(a, lambda g: -g)])


def mul(a, b):
    tape = _tape_of(a, b)
    va, vb = _value(a), _value(b)
    out = va * vb
    if tape is None:
        return out
    parents = []
    if isinstance(a, Var):
        parents.append((a, lambda g, s=a.shape: _unbroadcast(g * vb, s)))
    if isinstance(b, Var):
        parents.append((b, lambda g, s=b.shape: _unbroadcast(g * va, s)))
    return Var(out, tape, parents)


def square(a):
    if not isinstance(a, Var):
        return a * a
    va = a.value
    return Var(va * va, a.tape, [(a, lambda g: 2.0 * g * va)])


def exp(a):
    if not isinstance(a, Var):
        return np.exp(a)
    with np.errstate(over="ignore"):
        out = _check_finite(np.exp(a.value), "exp")
    return Var(out, a.tape, [(a, lambda g: g * out)])


def tanh(a):
    if not isinstance(a, Var):
        return np.tanh(a)
    out = np.tanh(a.value)
    return Var(out, a.tape, [(a, lambda g: g * (1.0 - out * out))])


def sum(a, axis=None):  # noqa: A001 - mirrors numpy
    if not isinstance(a, Var):
        return np.sum(a, axis=axis)
    shape = a.shape
    out = np.sum(a.value, axis=axis)

    def vjp(g):
        if axis is not None:
            g = np.expand_dims(g, axis)
        return np.broadcast_to(g, shape)

    return Var(out, a.tape, [(a, vjp)])


def mean(a, axis=None):
    if not isinstance(a, Var):
        return np.mean(a, axis=axis)
    n = np.size(a.value) if axis is None else a.shape[axis]
    return mul(sum(a, axis=axis), 1.0 / n)


def getitem(a, key):
    if not isinstance(a, Var):
        return a[key]
    shape = a.shape

    def vjp(g):
        full = np.zeros(shape)
        if _needs_add_at(key):
            np.add.at(full, key, g)
        else:
            full[key] = g
        return full

    return Var(a.value[key], a.tape, [(a, vjp)])


def _needs_add_at(key):
    keys = key if isinstance(key, tuple) else (key,)
    return any(isinstance(k, (list, np.ndarray)) for k in keys)


def reshape(a, shape):
    if not isinstance(a, Var):
        return np.reshape(a, shape)
    old = a.shape
    return Var(np.reshape(a.value, shape), a.tape, [(a, lambda g: np.reshape(g, old))])


def matmul(a, b):
    """``a @ b`` for 1-D or 2-D operands."""
    tape = _tape_of(a, b)
    va, vb = _value(a), _value(b)
    out = va @ vb
    if tape is None:
        return out
    # promote vectors to matrices so both VJPs are plain matrix products
    a2 = va.reshape(1, -1) if va.ndim == 1 else va
    b2 = vb.reshape(-1, 1) if vb.ndim == 1 else vb
    out_shape = (a2.shape[0], b2.shape[1])
    parents = []
    if isinstance(a, Var):
        parents.append((a, lambda g: (np.reshape(g, out_shape) @ b2.T).reshape(va.shape)))
    if isinstance(b, Var):
        parents.append((b, lambda g: (a2.T @ np.reshape(g, out_shape)).reshape(vb.shape)))
    return Var(out, tape, parents)


def trapezoid(a, spacing: float, axis: int = -1):
    """Composite trapezoid rule along ``axis`` of a tape variable."""
    va = _value(a)
    n = np.shape(va)[axis]
    if n < 2:
        raise UsageError("trapezoid needs at least 2 samples")
    w = np.full(n, spacing)
    w[0] = w[-1] = 0.5 * spacing
    shape = [1] * np.ndim(va)
    shape[axis] = n
    w = w.reshape(shape)
    return sum(mul(a, w), axis=axis)
