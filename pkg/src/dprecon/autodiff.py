"""Minimal reverse-mode autodiff over float64 arrays.

Only the operations the encoder-decoder network and its losses need are
provided. Every op takes the :class:`Tape` it records onto; tensors that are
not on a tape (constants) get no gradient.

Example:
    >>> tape = Tape()
    >>> x = tape.leaf(np.ones((1, 4, 4)))
    >>> g = tape.backward(sum_squares(x, tape))
    >>> g[x].sum()
    32.0
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels


class NonFiniteError(FloatingPointError):
    """Raised when an operation produces NaN or Inf."""


def _check_finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{what} produced non-finite values")
    return arr


class Tensor:
    """Immutable float64 array, optionally bound to a node on a tape."""

    __slots__ = ("data", "node", "name")

    def __init__(self, data, node=None, name=None):
        arr = np.array(data, dtype=np.float64, copy=True, order="C")
        if 0 in arr.shape and arr.ndim != 3:
            raise ValueError(f"tensor extents must be positive, got {arr.shape}")
        arr.setflags(write=False)
        self.data = arr
        self.node = node
        self.name = name

    @classmethod
    def _wrap(cls, arr, node=None):
        # internal: take ownership of a freshly computed array without copying
        t = cls.__new__(cls)
        arr = np.asarray(arr, dtype=np.float64)
        if not arr.flags.c_contiguous:
            arr = arr.copy()
        arr.setflags(write=False)
        t.data = arr
        t.node = node
        t.name = None
        return t

    @property
    def shape(self):
        return self.data.shape

    def item(self):
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else None

    def __repr__(self):
        return f"Tensor(shape={self.shape}, node={self.node})"


@dataclass
class Node:
    id: int
    op: str
    parents: tuple
    value: np.ndarray
    backward_fn: object = field(default=None, repr=False)


class Tape:
    """Records operations in execution order (which is a topological order)."""

    def __init__(self):
        self.nodes = []

    def _record(self, op, parents, value, backward_fn):
        node = Node(len(self.nodes), op, tuple(parents), value, backward_fn)
        self.nodes.append(node)
        return node.id

    def leaf(self, data, name=None):
        """Register a differentiable input."""
        if isinstance(data, Tensor):
            data = data.data
        t = Tensor(data, name=name)
        t.node = self._record("leaf", (), t.data, None)
        return t

    def backward(self, loss):
        """Gradients of a scalar ``loss`` for every node, indexable by leaf tensor.

        Accumulators are fresh for each call; nodes are visited once, in
        reverse recording order.
        """
        if loss.node is None or loss.data.size != 1:
            raise ValueError(
                f"backward needs a scalar recorded on this tape, got shape {loss.shape}")
        grads = [None] * (loss.node + 1)
        grads[loss.node] = np.ones_like(loss.data)
        for node in reversed(self.nodes[:loss.node + 1]):
            g = grads[node.id]
            if g is None or node.backward_fn is None:
                continue
            for pid, pg in zip(node.parents, node.backward_fn(g)):
                if pid is None or pg is None:
                    continue
                if grads[pid] is None:
                    grads[pid] = np.zeros_like(self.nodes[pid].value)
                grads[pid] = grads[pid] + pg
        return Gradients(self, grads)


class Gradients:
    def __init__(self, tape, grads):
        self._tape = tape
        self._grads = grads

    def __getitem__(self, tensor):
        nid = tensor.node
        if nid is None or nid >= len(self._grads):
            return np.zeros(tensor.shape)
        g = self._grads[nid]
        return np.zeros(tensor.shape) if g is None else g


def _nid(t):
    return t.node if isinstance(t, Tensor) else None


def _record(tape, op, inputs, value, backward_fn):
    value = _check_finite(value, op)
    parents = tuple(_nid(t) for t in inputs)
    if tape is None or all(p is None for p in parents):
        return Tensor._wrap(value)
    return Tensor._wrap(value, tape._record(op, parents, value, backward_fn))


def conv2d(x, w, b, stride=1, pad=0, tape=None):
    """2-D cross-correlation of a (C_in, H, W) tensor with (C_out, C_in, k, k) weights."""
    if x.data.ndim != 3 or w.data.ndim != 4 or b.data.ndim != 1:
        raise ValueError(
            f"conv2d expects x[C,H,W], w[O,C,k,k], b[O]; got {x.shape}, {w.shape}, {b.shape}")
    cout, cin, k, k2 = w.shape
    c, h, wd = x.shape
    if k != k2:
        raise ValueError(f"conv2d kernel must be square, got {k}x{k2}")
    if cin != c:
        raise ValueError(f"conv2d: input has {c} channels, weights expect {cin}")
    if b.shape[0] != cout:
        raise ValueError(f"conv2d: bias length {b.shape[0]} != output channels {cout}")
    if stride not in (1, 2):
        raise ValueError(f"conv2d stride must be 1 or 2, got {stride}")
    ho = (h + 2 * pad - k) // stride + 1
    wo = (wd + 2 * pad - k) // stride + 1
    if ho < 1 or wo < 1:
        raise ValueError(f"conv2d output would be empty for input {x.shape}, kernel {k}")

    cols = kernels.im2col(x.data, k, stride, pad)
    wmat = w.data.reshape(cout, -1)
    with np.errstate(over="ignore", invalid="ignore"):
        out = (wmat @ cols + b.data[:, None]).reshape(cout, ho, wo)

    def backward(g):
        gm = g.reshape(cout, -1)
        gx = kernels.col2im(wmat.T @ gm, c, h, wd, k, stride, pad)
        gw = (gm @ cols.T).reshape(w.shape)
        gb = gm.sum(axis=1)
        return gx, gw, gb

    return _record(tape, "conv2d", (x, w, b), out, backward)


def leaky_relu(x, slope, tape=None):
    if not 0.0 <= slope < 1.0:
        raise ValueError(f"leaky_relu slope must be in [0, 1), got {slope}")
    pos = x.data > 0
    out = np.where(pos, x.data, slope * x.data)

    def backward(g):
        return (np.where(pos, g, slope * g),)

    return _record(tape, "leaky_relu", (x,), out, backward)


def upsample_nearest(x, factor, tape=None):
    if factor < 1:
        raise ValueError(f"upsample factor must be >= 1, got {factor}")
    if factor == 1:
        out = x.data.copy()
        return _record(tape, "upsample", (x,), out, lambda g: (g,))
    out = kernels.upsample(x.data, factor)

    def backward(g):
        return (kernels.upsample_adjoint(np.ascontiguousarray(g), factor),)

    return _record(tape, "upsample", (x,), out, backward)


def concat_channels(a, b, tape=None):
    if a.shape[1:] != b.shape[1:]:
        raise ValueError(f"concat_channels spatial mismatch: {a.shape} vs {b.shape}")
    ca = a.shape[0]
    out = np.concatenate([a.data, b.data], axis=0)
    return _record(tape, "concat", (a, b), out, lambda g: (g[:ca], g[ca:]))


def sum_all(x, tape=None):
    return _record(tape, "sum", (x,), np.array(x.data.sum()),
                   lambda g: (np.full(x.shape, g.reshape(())[()]),))


def sum_squares(x, tape=None):
    flat = x.data.reshape(-1)
    out = np.array(flat @ flat)
    return _record(tape, "sum_squares", (x,), out,
                   lambda g: (2.0 * g.reshape(())[()] * x.data,))


def add(a, b, tape=None):
    if a.shape != b.shape:
        raise ValueError(f"add shape mismatch: {a.shape} vs {b.shape}")
    return _record(tape, "add", (a, b), a.data + b.data, lambda g: (g, g))


def scale(x, alpha, tape=None):
    alpha = float(alpha)
    return _record(tape, "scale", (x,), alpha * x.data, lambda g: (alpha * g,))


def external_loss(x, fn, tape=None):
    """Scalar loss computed outside the tape.

    ``fn(array) -> (value, grad)`` must return the loss and its gradient with
    respect to ``x``; the gradient is scaled by the upstream value on backward.
    """
    value, grad = fn(x.data)
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != x.shape:
        raise ValueError(f"external loss gradient shape {grad.shape} != input {x.shape}")
    return _record(tape, "external", (x,), np.array(float(value)),
                   lambda g: (g.reshape(())[()] * grad,))
