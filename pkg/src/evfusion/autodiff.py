"""A small reverse-mode differentiation tape over numpy arrays.

Every operation on a :class:`Tensor` records its inputs and a closure that
maps the output adjoint to input adjoints.  Calling :meth:`Tensor.backward`
on a scalar walks the recorded graph in reverse topological order.

The module-level functions (``exp``, ``log``, ``digamma`` ...) accept either
tensors or plain arrays, so numeric code written against them runs unchanged
with or without a tape.
"""

import numpy as np

from . import special

CAP = 1e13
_LOG_CAP = float(np.log(CAP))


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _is_basic_index(index):
    items = index if isinstance(index, tuple) else (index,)
    return all(
        item is None or item is Ellipsis or isinstance(item, (int, np.integer, slice))
        for item in items
    )


class Tensor:
    # numpy must defer to our reflected operators instead of broadcasting us as objects
    __array_ufunc__ = None

    def __init__(self, value, parents=(), backward_fn=None, requires_grad=False):
        self.value = np.asarray(value, dtype=np.float64)
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad or any(p.requires_grad for p in parents)
        self.grad = None

    def __repr__(self):
        return f"Tensor(shape={self.value.shape}, requires_grad={self.requires_grad})"

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self):
        return self.value.ndim

    def __len__(self):
        return len(self.value)

    def item(self):
        return float(self.value)

    def numpy(self):
        return self.value.copy()

    # -- recording -------------------------------------------------------

    @staticmethod
    def _record(value, parents, backward_fn):
        return Tensor(value, parents=tuple(parents), backward_fn=backward_fn)

    def backward(self):
        """Populate ``.grad`` on every node of the graph that needs it."""
        if self.value.size != 1:
            raise ValueError("backward() needs a scalar output")
        if not self.parents:
            raise RuntimeError("no recorded operations: run a forward pass first")

        order = []
        seen = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node.parents:
                if id(parent) not in seen and parent.requires_grad:
                    stack.append((parent, False))

        grads = {id(self): np.ones_like(self.value)}
        for node in reversed(order):
            g = grads.pop(id(node), None)
            if g is None:
                g = np.zeros_like(node.value)
            if not node.parents:
                node.grad = g
                continue
            if node.requires_grad:
                node.grad = g
            for parent, pg in zip(node.parents, node.backward_fn(g)):
                if pg is None or not parent.requires_grad:
                    continue
                if id(parent) in grads:
                    grads[id(parent)] = grads[id(parent)] + pg
                else:
                    grads[id(parent)] = pg

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = as_tensor(other)
        a, b = self.shape, other.shape
        return Tensor._record(
            self.value + other.value, (self, other),
            lambda g: (_unbroadcast(g, a), _unbroadcast(g, b)))

    __radd__ = __add__

    def __sub__(self, other):
        other = as_tensor(other)
        a, b = self.shape, other.shape
        return Tensor._record(
            self.value - other.value, (self, other),
            lambda g: (_unbroadcast(g, a), _unbroadcast(-g, b)))

    def __rsub__(self, other):
        return as_tensor(other) - self

    def __neg__(self):
        return Tensor._record(-self.value, (self,), lambda g: (-g,))

    def __mul__(self, other):
        other = as_tensor(other)
        x, y = self.value, other.value
        return Tensor._record(
            x * y, (self, other),
            lambda g: (_unbroadcast(g * y, x.shape), _unbroadcast(g * x, y.shape)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_tensor(other)
        x, y = self.value, other.value
        out = x / y
        return Tensor._record(
            out, (self, other),
            lambda g: (_unbroadcast(g / y, x.shape), _unbroadcast(-g * out / y, y.shape)))

    def __rtruediv__(self, other):
        return as_tensor(other) / self

    def __pow__(self, exponent):
        if isinstance(exponent, Tensor):
            raise TypeError("only constant exponents are supported")
        p = float(exponent)
        x = self.value
        out = x ** p

        def backward_fn(g):
            with np.errstate(divide="ignore", invalid="ignore"):
                d = p * x ** (p - 1.0)
            # 0 ** (p - 1) is singular for p < 1; treat it like the |x| kink
            d = np.where(x == 0.0, 0.0 if p != 1.0 else 1.0, d)
            return (g * d,)

        return Tensor._record(out, (self,), backward_fn)

    def __abs__(self):
        x = self.value
        return Tensor._record(np.abs(x), (self,), lambda g: (g * np.sign(x),))

    def __matmul__(self, other):
        other = as_tensor(other)
        x, y = self.value, other.value
        return Tensor._record(x @ y, (self, other), lambda g: (g @ y.T, x.T @ g))

    def __rmatmul__(self, other):
        return as_tensor(other) @ self

    # -- reductions and indexing ----------------------------------------

    def sum(self, axis=None, keepdims=False):
        shape = self.shape

        def backward_fn(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, shape).copy(),)

        return Tensor._record(self.value.sum(axis=axis, keepdims=keepdims), (self,), backward_fn)

    def mean(self, axis=None, keepdims=False):
        n = self.value.size if axis is None else self.value.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    def prod(self, axis=0, keepdims=False):
        x = self.value
        out = x.prod(axis=axis, keepdims=keepdims)

        def backward_fn(g):
            # product of all other entries, via exclusive prefix and suffix products
            moved = np.moveaxis(x, axis, 0)
            ones = np.ones_like(moved[:1])
            left = np.cumprod(np.concatenate([ones, moved[:-1]]), axis=0)
            right = np.cumprod(np.concatenate([ones, moved[::-1][:-1]]), axis=0)[::-1]
            others = np.moveaxis(left * right, 0, axis)
            if not keepdims:
                g = np.expand_dims(g, axis)
            return (g * others,)

        return Tensor._record(out, (self,), backward_fn)

    def __getitem__(self, index):
        shape = self.shape
        basic = _is_basic_index(index)

        def backward_fn(g):
            full = np.zeros(shape)
            if basic:
                full[index] += g
            else:
                np.add.at(full, index, g)
            return (full,)

        return Tensor._record(self.value[index], (self,), backward_fn)

    def reshape(self, *shape):
        old = self.shape
        return Tensor._record(self.value.reshape(*shape), (self,), lambda g: (g.reshape(old),))


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def parameter(value):
    """A leaf tensor whose gradient is wanted."""
    return Tensor(np.array(value, dtype=np.float64), requires_grad=True)


def value_of(x):
    return x.value if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def _unary(x, fn, dfn):
    """Apply ``fn`` to arrays; on tensors also record ``dfn(x, out) * g``."""
    if not isinstance(x, Tensor):
        return fn(np.asarray(x, dtype=np.float64))
    v = x.value
    out = fn(v)
    return Tensor._record(out, (x,), lambda g: (g * dfn(v, out),))


def exp(x):
    return _unary(x, np.exp, lambda v, out: out)


def log(x):
    return _unary(x, np.log, lambda v, out: 1.0 / v)


def log1p(x):
    return _unary(x, np.log1p, lambda v, out: 1.0 / (1.0 + v))


def expm1(x):
    return _unary(x, np.expm1, lambda v, out: out + 1.0)


def relu(x):
    return _unary(x, lambda v: np.maximum(v, 0.0), lambda v, out: (v > 0).astype(np.float64))


def maximum(x, floor):
    """Elementwise max with a constant; the tie goes to the constant."""
    return _unary(x, lambda v: np.maximum(v, floor), lambda v, out: (v > floor).astype(np.float64))


def _capped_exp_value(v):
    z = v - _LOG_CAP
    # sigmoid without overflow on either tail
    pos = z >= 0
    ez = np.exp(np.where(pos, -z, z))
    sig = np.where(pos, 1.0 / (1.0 + ez), ez / (1.0 + ez))
    return CAP * sig


def capped_exp(x):
    """Exponential saturating at ``CAP``: CAP / (1 + CAP * exp(-x))."""
    return _unary(x, _capped_exp_value, lambda v, out: out * (1.0 - out / CAP))


def digamma(x):
    return _unary(x, special.digamma, lambda v, out: special.trigamma(v))


def lgamma(x):
    return _unary(x, special.lgamma, lambda v, out: special.digamma(v))


def stack(items, axis=0):
    """Stack tensors (or arrays) along a new axis."""
    if not any(isinstance(t, Tensor) for t in items):
        return np.stack([np.asarray(t, dtype=np.float64) for t in items], axis=axis)
    tensors = [as_tensor(t) for t in items]
    out = np.stack([t.value for t in tensors], axis=axis)

    def backward_fn(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return Tensor._record(out, tensors, backward_fn)


def gradients(loss, params):
    """Run the backward pass from ``loss`` and return the adjoint of each param."""
    if not isinstance(loss, Tensor):
        raise RuntimeError("loss was not produced by a recorded forward pass")
    for p in params:
        p.grad = None
    loss.backward()
    return [np.zeros_like(p.value) if p.grad is None else p.grad for p in params]
