"""Reverse-mode automatic differentiation over numpy arrays.

Deterministic by construction: forward results depend only on parameter and
input values, backward walks a recorded tape in reverse topological order.
Float32 is the training dtype; graphs built from float64 leaves stay float64
(used by the gradient checker).
"""

from __future__ import annotations

import contextlib

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)

_grad_enabled = True


class NonFiniteError(ArithmeticError):
    """A forward or backward value left the finite range (NaN/Inf)."""


class GraphError(RuntimeError):
    """Backward called on a non-scalar loss or on a freed graph."""


@contextlib.contextmanager
def no_grad():
    """Disable tape recording inside the block (inference mode)."""
    global _grad_enabled
    prev = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = prev


def grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """N-d float array plus an optional gradient accumulator.

    `requires_grad` marks leaves (parameters, probed inputs); only those
    receive a `.grad` during backward. Interior nodes carry the tape.
    """

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_grad_fn", "_freed")

    def __init__(self, data, requires_grad: bool = False, dtype=None):
        arr = np.asarray(data, dtype=dtype)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self._parents = ()
        self._grad_fn = None
        self._freed = False

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def _node(data: np.ndarray, parents, grad_fn) -> "Tensor":
        out = Tensor.__new__(Tensor)
        out.data = data
        out.requires_grad = False
        out.grad = None
        out._freed = False
        if _grad_enabled and any(p.requires_grad or p._grad_fn is not None for p in parents):
            out._parents = tuple(parents)
            out._grad_fn = grad_fn
        else:
            out._parents = ()
            out._grad_fn = None
        return out

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    @property
    def dtype(self):
        return self.data.dtype

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{flag})"

    def item(self) -> float:
        return float(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self):
        self.grad = None

    def check_finite(self, what: str = "tensor") -> "Tensor":
        if not np.all(np.isfinite(self.data)):
            raise NonFiniteError(f"non-finite values in {what}")
        return self

    # -- backward -------------------------------------------------------------

    def backward(self, free: bool = False):
        """Accumulate d(self)/d(leaf) into leaf.grad for every reachable leaf
        with requires_grad. Repeated calls keep accumulating. With free=True
        the tape is released afterwards and further backward calls raise.
        """
        if self.data.size != 1:
            raise GraphError("backward requires a scalar loss")
        if self._freed:
            raise GraphError("graph already freed")

        order = _toposort(self)
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in order:
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                if node.grad is None:
                    node.grad = np.zeros_like(node.data)
                node.grad += g
            if node._grad_fn is None:
                continue
            parent_grads = node._grad_fn(g)
            for parent, pg in zip(node._parents, parent_grads):
                if pg is None or not (parent.requires_grad or parent._grad_fn is not None):
                    continue
                acc = grads.get(id(parent))
                if acc is None:
                    grads[id(parent)] = pg
                else:
                    # fresh allocation: grad_fns may hand back shared arrays
                    grads[id(parent)] = acc + pg
        if free:
            for node in order:
                if node._grad_fn is not None:
                    node._parents = ()
                    node._grad_fn = None
                    node._freed = True
            self._freed = True

    # -- operators ------------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __neg__(self):
        return mul(self, -1.0)

    def __sub__(self, other):
        return add(self, mul(other if isinstance(other, Tensor) else _const(other, self.dtype), -1.0))

    def __rsub__(self, other):
        return add(_const(other, self.dtype), mul(self, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("tensor/tensor division is not part of the op set")
        return mul(self, 1.0 / float(other))

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def sum(self, axis=None, keepdims: bool = False):
        return tsum(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims: bool = False):
        return tmean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        return reshape(self, shape if len(shape) != 1 else shape[0])

    def transpose(self, *axes):
        return transpose(self, axes if len(axes) != 1 else axes[0])


def _toposort(root: Tensor) -> list[Tensor]:
    """Root-first topological order, iterative to survive deep graphs."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in seen:
                stack.append((p, False))
    order.reverse()
    return order


def _const(x, dtype) -> Tensor:
    return Tensor(np.asarray(x, dtype=dtype))


def _reduce_to(g: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum gradient g down to `shape` (undo numpy broadcasting)."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for i, (gs, s) in enumerate(zip(g.shape, shape)):
        if s == 1 and gs != 1:
            g = g.sum(axis=i, keepdims=True)
    return g


# -- elementwise / linear ops ------------------------------------------------


def add(a, b) -> Tensor:
    if not isinstance(a, Tensor):
        a = _const(a, b.dtype)
    if not isinstance(b, Tensor):
        b = _const(b, a.dtype)
    data = a.data + b.data

    def grad_fn(g):
        return _reduce_to(g, a.data.shape), _reduce_to(g, b.data.shape)

    return Tensor._node(data, (a, b), grad_fn)


def mul(a, b) -> Tensor:
    if not isinstance(a, Tensor):
        a = _const(a, b.dtype)
    if not isinstance(b, Tensor):
        b = _const(b, a.dtype)
    data = a.data * b.data

    def grad_fn(g):
        return _reduce_to(g * b.data, a.data.shape), _reduce_to(g * a.data, b.data.shape)

    return Tensor._node(data, (a, b), grad_fn)


def _mm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """matmul that avoids numpy's slow stacked path: 2D rhs collapses to one
    GEMM, equal-batch stacks loop per slice into a preallocated output."""
    if a.ndim == 2 and b.ndim == 2:
        return a @ b
    if b.ndim == 2:
        lead = a.shape[:-1]
        return (a.reshape(-1, a.shape[-1]) @ b).reshape(lead + (b.shape[-1],))
    if a.ndim == 2:
        return a @ b  # rare; numpy handles it
    if a.shape[:-2] == b.shape[:-2]:
        lead = a.shape[:-2]
        m, k = a.shape[-2:]
        n = b.shape[-1]
        a3 = a.reshape(-1, m, k)
        b3 = b.reshape(-1, k, n)
        out = np.empty((a3.shape[0], m, n), dtype=np.result_type(a, b))
        for i in range(a3.shape[0]):
            np.matmul(a3[i], b3[i], out=out[i])
        return out.reshape(lead + (m, n))
    return a @ b


def matmul(a: Tensor, b: Tensor) -> Tensor:
    data = _mm(a.data, b.data)

    def grad_fn(g):
        if b.data.ndim == 2 and g.ndim > 2:
            # weight case: fold leading axes into one pair of GEMMs
            g2 = g.reshape(-1, g.shape[-1])
            a2 = a.data.reshape(-1, a.data.shape[-1])
            return (g2 @ b.data.T).reshape(a.data.shape), a2.T @ g2
        ga = _reduce_to(_mm(g, np.swapaxes(b.data, -1, -2)), a.data.shape)
        gb = _reduce_to(_mm(np.swapaxes(a.data, -1, -2), g), b.data.shape)
        return ga, gb

    return Tensor._node(data, (a, b), grad_fn)


def reshape(x: Tensor, shape) -> Tensor:
    data = x.data.reshape(shape)

    def grad_fn(g):
        return (g.reshape(x.data.shape),)

    return Tensor._node(data, (x,), grad_fn)


def transpose(x: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    data = np.ascontiguousarray(x.data.transpose(axes))
    inv = tuple(np.argsort(axes))

    def grad_fn(g):
        return (np.ascontiguousarray(g.transpose(inv)),)

    return Tensor._node(data, (x,), grad_fn)


def take(x: Tensor, key) -> Tensor:
    data = np.ascontiguousarray(x.data[key])

    def grad_fn(g):
        gx = np.zeros_like(x.data)
        gx[key] = g
        return (gx,)

    return Tensor._node(data, (x,), grad_fn)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    splits = np.cumsum(sizes)[:-1]

    def grad_fn(g):
        return tuple(np.ascontiguousarray(p) for p in np.split(g, splits, axis=axis))

    return Tensor._node(data, tuple(tensors), grad_fn)


def broadcast_to(x: Tensor, shape) -> Tensor:
    shape = tuple(shape)
    data = np.ascontiguousarray(np.broadcast_to(x.data, shape))

    def grad_fn(g):
        return (_reduce_to(g, x.data.shape),)

    return Tensor._node(data, (x,), grad_fn)


def tsum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    data = np.asarray(x.data.sum(axis=axis, keepdims=keepdims))

    def grad_fn(g):
        if axis is None:
            g_exp = g
        else:
            g_exp = g if keepdims else np.expand_dims(g, axis)
        return (np.broadcast_to(g_exp, x.data.shape).astype(x.data.dtype, copy=True),)

    return Tensor._node(data, (x,), grad_fn)


def tmean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        n = x.data.size
    elif isinstance(axis, tuple):
        n = int(np.prod([x.data.shape[a] for a in axis]))
    else:
        n = x.data.shape[axis]
    return mul(tsum(x, axis=axis, keepdims=keepdims), 1.0 / n)


# -- fused nonlinear ops -----------------------------------------------------


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    y = x.data - x.data.max(axis=axis, keepdims=True)
    np.exp(y, out=y)
    y /= y.sum(axis=axis, keepdims=True)

    def grad_fn(g):
        gx = g * y
        dot = gx.sum(axis=axis, keepdims=True)
        gx -= dot * y
        return (gx,)

    return Tensor._node(y, (x,), grad_fn)


def softmax_(x: Tensor, axis: int = -1) -> Tensor:
    """In-place softmax for single-consumer interior nodes (attention logits):
    reuses x's buffer as the output and mutates the incoming gradient during
    backward. Callers must not read x's values afterwards."""
    y = x.data
    y -= y.max(axis=axis, keepdims=True)
    np.exp(y, out=y)
    y /= y.sum(axis=axis, keepdims=True)

    def grad_fn(g):
        g *= y
        dot = g.sum(axis=axis, keepdims=True)
        g -= dot * y
        return (g,)

    return Tensor._node(y, (x,), grad_fn)


def gelu(x: Tensor) -> Tensor:
    """Exact GELU: x * Phi(x) with the Gaussian CDF via erf."""
    xd = x.data
    cdf = 0.5 * (1.0 + erf(xd * _INV_SQRT2))
    y = (xd * cdf).astype(xd.dtype, copy=False)

    def grad_fn(g):
        pdf = np.exp(-0.5 * xd * xd) * _INV_SQRT2PI
        return ((g * (cdf + xd * pdf)).astype(xd.dtype, copy=False),)

    return Tensor._node(y, (x,), grad_fn)


def layer_norm(x: Tensor, gain: Tensor | None = None, bias: Tensor | None = None,
               eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis to zero mean / unit variance, then affine."""
    xd = x.data
    mu = xd.mean(axis=-1, keepdims=True)
    xhat = xd - mu
    var = (xhat * xhat).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat *= inv

    parents = [x]
    if gain is not None:
        parents.append(gain)
    if bias is not None:
        parents.append(bias)

    y = xhat
    if gain is not None:
        y = y * gain.data
    if bias is not None:
        y = y + bias.data

    def grad_fn(g):
        gi = g * gain.data if gain is not None else g
        m1 = gi.mean(axis=-1, keepdims=True)
        m2 = (gi * xhat).mean(axis=-1, keepdims=True)
        gx = (inv * (gi - m1 - xhat * m2)).astype(xd.dtype, copy=False)
        out = [gx]
        if gain is not None:
            out.append(_reduce_to(g * xhat, gain.data.shape))
        if bias is not None:
            out.append(_reduce_to(g, bias.data.shape))
        return tuple(out)

    return Tensor._node(y.astype(xd.dtype, copy=False), tuple(parents), grad_fn)
