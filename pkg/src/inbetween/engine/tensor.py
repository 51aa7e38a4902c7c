"""Dense-tensor reverse-mode automatic differentiation.

Define-by-run graphs over numpy arrays. Precision is a process-wide switch
(float64 for tests, float32 for training) and must not change mid-run; binary
operations assert their operands agree. `no_grad()` disables graph building
for inference paths.
"""
from __future__ import annotations

from contextlib import contextmanager

import numpy as np

_default_dtype = np.float64
_grad_enabled = True


def set_default_dtype(dtype):
    """Set the process-wide tensor precision (np.float32 or np.float64)."""
    global _default_dtype
    dtype = np.dtype(dtype)
    if dtype not in (np.dtype(np.float32), np.dtype(np.float64)):
        raise ValueError("supported dtypes: float32, float64")
    _default_dtype = dtype.type


def default_dtype():
    return _default_dtype


@contextmanager
def no_grad():
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def grad_enabled():
    return _grad_enabled


class Tensor:
    """A value in the computation graph."""

    __slots__ = ("values", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, values, requires_grad=False):
        self.values = np.asarray(values, dtype=_default_dtype)
        self.grad = None
        self.requires_grad = requires_grad
        self._parents = ()
        self._backward = None

    @property
    def shape(self):
        return self.values.shape

    def __repr__(self):
        return f"Tensor(shape={self.values.shape}, requires_grad={self.requires_grad})"

    def detach(self):
        return Tensor(self.values.copy())

    def _accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        self.grad += g

    def zero_grad(self):
        self.grad = None

    def backward(self):
        """Reverse-mode gradient of this scalar w.r.t. all reachable tensors."""
        if self.values.size != 1:
            raise ValueError("backward() requires a scalar loss")
        topo = _topological_order(self)
        self._accumulate(np.ones_like(self.values))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # operator sugar -------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return scale(self, -1.0)

    def __sub__(self, other):
        return add(self, scale(_as_tensor(other), -1.0))

    def __rsub__(self, other):
        return add(_as_tensor(other), scale(self, -1.0))

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return take(self, idx)


def _as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _check_dtypes(a, b):
    if a.values.dtype != b.values.dtype:
        raise TypeError(f"mixed precision in one graph: {a.values.dtype} vs {b.values.dtype}")


def _topological_order(root):
    order, visited = [], set()
    stack = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def _unbroadcast(grad, shape):
    """Reduce a broadcast gradient back to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _make(values, parents, backward):
    out = Tensor(values)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


# primitives ---------------------------------------------------------------

def add(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_dtypes(a, b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.values.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.values.shape))

    return _make(a.values + b.values, (a, b), backward)


def mul(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_dtypes(a, b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.values, a.values.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.values, b.values.shape))

    return _make(a.values * b.values, (a, b), backward)


def div(a, b):
    a, b = _as_tensor(a), _as_tensor(b)
    _check_dtypes(a, b)

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g / b.values, a.values.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-g * a.values / (b.values * b.values), b.values.shape))

    return _make(a.values / b.values, (a, b), backward)


def scale(a, s):
    a = _as_tensor(a)
    s = float(s)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * s)

    return _make(a.values * s, (a,), backward)


def matmul(a, b):
    """a @ b where b is 2-D; a may carry leading batch axes."""
    a, b = _as_tensor(a), _as_tensor(b)
    _check_dtypes(a, b)
    if b.values.ndim != 2:
        raise ValueError("matmul right operand must be 2-D")

    def backward(g):
        if a.requires_grad:
            a._accumulate(g @ b.values.T)
        if b.requires_grad:
            lhs = a.values.reshape(-1, a.values.shape[-1])
            b._accumulate(lhs.T @ g.reshape(-1, g.shape[-1]))

    return _make(a.values @ b.values, (a, b), backward)


def concat(tensors, axis=-1):
    tensors = [_as_tensor(t) for t in tensors]
    for t in tensors[1:]:
        _check_dtypes(tensors[0], t)
    sizes = [t.values.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        pieces = np.split(g, offsets[1:-1], axis=axis)
        for t, piece in zip(tensors, pieces):
            if t.requires_grad:
                t._accumulate(piece)

    return _make(np.concatenate([t.values for t in tensors], axis=axis), tensors, backward)


def take(a, idx):
    """Slice/index view of a tensor (basic indexing only)."""
    a = _as_tensor(a)

    def backward(g):
        if a.requires_grad:
            full = np.zeros_like(a.values)
            full[idx] += g
            a._accumulate(full)

    return _make(a.values[idx], (a,), backward)


def reshape(a, shape):
    a = _as_tensor(a)
    old = a.values.shape

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.reshape(old))

    return _make(a.values.reshape(shape), (a,), backward)


def sum_(a, axis=None, keepdims=False):
    a = _as_tensor(a)

    def backward(g):
        if not a.requires_grad:
            return
        if axis is None:
            a._accumulate(np.broadcast_to(g, a.values.shape).copy())
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(gg, a.values.shape).copy())

    return _make(a.values.sum(axis=axis, keepdims=keepdims), (a,), backward)


def mean(a, axis=None, keepdims=False):
    a = _as_tensor(a)
    count = a.values.size if axis is None else a.values.shape[axis]

    def backward(g):
        if not a.requires_grad:
            return
        if axis is None:
            a._accumulate(np.broadcast_to(g / count, a.values.shape).copy())
        else:
            gg = g if keepdims else np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(gg / count, a.values.shape).copy())

    return _make(a.values.mean(axis=axis, keepdims=keepdims), (a,), backward)


def square(a):
    a = _as_tensor(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * 2.0 * a.values)

    return _make(a.values * a.values, (a,), backward)


def sqrt(a):
    a = _as_tensor(a)
    out_values = np.sqrt(a.values)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * 0.5 / out_values)

    return _make(out_values, (a,), backward)


def abs_(a):
    """|a| with sign subgradient (0 at 0)."""
    a = _as_tensor(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * np.sign(a.values))

    return _make(np.abs(a.values), (a,), backward)


def l1_norm(a):
    """Sum of absolute values, sign subgradient."""
    return sum_(abs_(a))


def sigmoid(a):
    a = _as_tensor(a)
    out_values = 1.0 / (1.0 + np.exp(-a.values))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * out_values * (1.0 - out_values))

    return _make(out_values, (a,), backward)


def tanh(a):
    a = _as_tensor(a)
    out_values = np.tanh(a.values)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * (1.0 - out_values * out_values))

    return _make(out_values, (a,), backward)


def relu(a):
    a = _as_tensor(a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * (a.values > 0))

    return _make(np.maximum(a.values, 0.0), (a,), backward)


PLU_ALPHA = 0.1
PLU_C = 1.0


def plu(a, alpha=PLU_ALPHA, c=PLU_C):
    """Piecewise linear unit: max(alpha(x+c)-c, min(alpha(x-c)+c, x)).

    Identity on [-c, c], slope alpha outside.
    """
    a = _as_tensor(a)
    x = a.values
    out_values = np.maximum(alpha * (x + c) - c, np.minimum(alpha * (x - c) + c, x))

    def backward(g):
        if a.requires_grad:
            slope = np.where(np.abs(x) <= c, 1.0, alpha)
            a._accumulate(g * slope)

    return _make(out_values, (a,), backward)
