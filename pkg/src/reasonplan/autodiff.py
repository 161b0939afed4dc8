"""Reverse-mode autodiff over numpy arrays.

Small tensor engine: each op records a backward closure, `backward()` walks
the graph in reverse topological order. float64 throughout so finite
difference checks resolve to ~1e-7.
"""

from __future__ import annotations

import numpy as np


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum `grad` down to `shape` (inverse of numpy broadcasting)."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_prev")

    def __init__(self, data, requires_grad=False, _prev=()):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self._backward = None
        self._prev = _prev

    @property
    def shape(self):
        return self.data.shape

    def _accum(self, grad):
        # First contribution keeps a reference (callers hand over fresh arrays
        # or views that are never mutated afterward); later ones allocate.
        if self.grad is None:
            self.grad = grad
        else:
            self.grad = self.grad + grad

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out = Tensor(self.data + other.data,
                     self.requires_grad or other.requires_grad, (self, other))

        def bw():
            if self.requires_grad:
                self._accum(_unbroadcast(out.grad, self.data.shape))
            if other.requires_grad:
                other._accum(_unbroadcast(out.grad, other.data.shape))
        out._backward = bw
        return out

    def __mul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out = Tensor(self.data * other.data,
                     self.requires_grad or other.requires_grad, (self, other))

        def bw():
            if self.requires_grad:
                self._accum(_unbroadcast(out.grad * other.data, self.data.shape))
            if other.requires_grad:
                other._accum(_unbroadcast(out.grad * self.data, other.data.shape))
        out._backward = bw
        return out

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        return self + (-other)

    def __truediv__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out = Tensor(self.data / other.data,
                     self.requires_grad or other.requires_grad, (self, other))

        def bw():
            if self.requires_grad:
                self._accum(_unbroadcast(out.grad / other.data, self.data.shape))
            if other.requires_grad:
                other._accum(_unbroadcast(-out.grad * self.data / (other.data ** 2),
                                          other.data.shape))
        out._backward = bw
        return out

    def __matmul__(self, other):
        out = Tensor(self.data @ other.data,
                     self.requires_grad or other.requires_grad, (self, other))

        def bw():
            if self.requires_grad:
                g = out.grad @ np.swapaxes(other.data, -1, -2)
                self._accum(_unbroadcast(g, self.data.shape))
            if other.requires_grad:
                g = np.swapaxes(self.data, -1, -2) @ out.grad
                other._accum(_unbroadcast(g, other.data.shape))
        out._backward = bw
        return out

    def pow(self, exponent: float):
        out = Tensor(self.data ** exponent, self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                self._accum(out.grad * exponent * self.data ** (exponent - 1))
        out._backward = bw
        return out

    def sqrt(self):
        out = Tensor(np.sqrt(self.data), self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                self._accum(out.grad * 0.5 / out.data)
        out._backward = bw
        return out

    def relu(self):
        out = Tensor(np.maximum(self.data, 0.0), self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                self._accum(out.grad * (self.data > 0.0))
        out._backward = bw
        return out

    # -- shape ops --------------------------------------------------------

    def reshape(self, *shape):
        out = Tensor(self.data.reshape(*shape), self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                self._accum(out.grad.reshape(self.data.shape))
        out._backward = bw
        return out

    def swapaxes(self, a, b):
        out = Tensor(np.swapaxes(self.data, a, b), self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                self._accum(np.swapaxes(out.grad, a, b))
        out._backward = bw
        return out

    def rows(self, index):
        """Gather rows along axis 0 with an integer index array."""
        index = np.asarray(index, dtype=np.intp)
        out = Tensor(self.data[index], self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                g = np.zeros_like(self.data)
                np.add.at(g, index, out.grad)
                self._accum(g)
        out._backward = bw
        return out

    # -- reductions -------------------------------------------------------

    def sum(self, axis=None, keepdims=False):
        out = Tensor(self.data.sum(axis=axis, keepdims=keepdims),
                     self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                g = out.grad
                if axis is not None and not keepdims:
                    g = np.expand_dims(g, axis)
                self._accum(np.broadcast_to(g, self.data.shape).copy())
        out._backward = bw
        return out

    def mean(self, axis=None, keepdims=False):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # -- fused ops --------------------------------------------------------

    def softmax(self):
        """Softmax over the last axis. -inf inputs yield exactly-zero weights."""
        x = self.data
        m = np.max(x, axis=-1, keepdims=True)
        e = np.exp(x - m)
        s = e / e.sum(axis=-1, keepdims=True)
        out = Tensor(s, self.requires_grad, (self,))

        def bw():
            if self.requires_grad:
                g = out.grad
                dot = (g * s).sum(axis=-1, keepdims=True)
                self._accum(s * (g - dot))
        out._backward = bw
        return out

    # -- graph walk -------------------------------------------------------

    def backward(self):
        if self.data.size != 1:
            raise ValueError("backward() expects a scalar loss")
        topo: list[Tensor] = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for child in node._prev:
                stack.append((child, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward()

    def __radd__(self, other):
        return self + other

    def __rmul__(self, other):
        return self * other

    def __rsub__(self, other):
        return Tensor(other) + (-self)

    def item(self):
        return float(self.data)


def concat_rows(parts: list[Tensor]) -> Tensor:
    """Concatenate 2-D tensors along axis 0."""
    out = Tensor(np.concatenate([p.data for p in parts], axis=0),
                 any(p.requires_grad for p in parts), tuple(parts))

    def bw():
        off = 0
        for p in parts:
            n = p.data.shape[0]
            if p.requires_grad:
                p._accum(out.grad[off:off + n])
            off += n
    out._backward = bw
    return out


def place_rows(n_rows: int, index, rows: Tensor) -> Tensor:
    """(n_rows, D) zero matrix with `rows` written at `index` (unique positions)."""
    index = np.asarray(index, dtype=np.intp)
    data = np.zeros((n_rows, rows.data.shape[1]))
    data[index] = rows.data
    out = Tensor(data, rows.requires_grad, (rows,))

    def bw():
        if rows.requires_grad:
            rows._accum(out.grad[index])
    out._backward = bw
    return out


def cross_entropy_mean(logits: Tensor, targets) -> Tensor:
    """Mean NLL of `targets` under softmax(logits): logits (N, V), targets (N,)."""
    targets = np.asarray(targets, dtype=np.intp)
    x = logits.data
    m = np.max(x, axis=-1, keepdims=True)
    lse = m[:, 0] + np.log(np.exp(x - m).sum(axis=-1))
    nll = lse - x[np.arange(len(targets)), targets]
    out = Tensor(nll.mean(), logits.requires_grad, (logits,))

    def bw():
        if logits.requires_grad:
            p = np.exp(x - m)
            p /= p.sum(axis=-1, keepdims=True)
            p[np.arange(len(targets)), targets] -= 1.0
            logits._accum(out.grad * p / len(targets))
    out._backward = bw
    return out
