"""Dense reverse-mode automatic differentiation over float64 arrays.

A Tensor wraps a numpy array plus an optional closure that maps the
output cotangent to input cotangents. backward() walks the recorded
graph in reverse topological order and accumulates gradients. Everything
runs in float64 so gradients can be checked against central finite
differences at tight tolerance.
"""

from __future__ import annotations

from typing import Callable, Optional, Sequence

import numpy as np

from retrokit import kernels

__all__ = [
    "Tensor", "no_grad", "tensor", "zeros", "concat", "gather_rows",
    "segment_sum", "segment_mean", "segment_max", "segment_softmax",
    "softmax", "log_softmax", "cross_entropy", "bce_with_logits",
    "layer_norm", "dropout",
]

_grad_enabled = True


class no_grad:
    """Context manager that pauses graph recording."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def _unbroadcast(grad: np.ndarray, shape: tuple) -> np.ndarray:
    """Sum grad down to shape, undoing numpy broadcasting."""
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_vjp", "_spent")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._parents: tuple = ()
        self._vjp: Optional[Callable] = None
        self._spent = False

    # ---- construction of non-leaf nodes -------------------------------

    @staticmethod
    def _make(data: np.ndarray, parents: tuple, vjp: Callable) -> "Tensor":
        out = Tensor(data)
        if _grad_enabled and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._vjp = vjp
        return out

    # ---- bookkeeping ---------------------------------------------------

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def __len__(self) -> int:
        return len(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        if self._spent:
            raise RuntimeError(
                "backward already ran on this graph; rebuild the forward pass")
        self._spent = True
        if grad is None:
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, done = stack.pop()
            if done:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen and p.requires_grad:
                    stack.append((p, False))
        self.grad = grad if self.grad is None else self.grad + grad
        for node in reversed(topo):
            if node._vjp is None or node.grad is None:
                continue
            for parent, g in zip(node._parents, node._vjp(node.grad)):
                if g is None or not parent.requires_grad:
                    continue
                parent.grad = g if parent.grad is None else parent.grad + g

    # ---- arithmetic ----------------------------------------------------

    def __add__(self, other) -> "Tensor":
        other = _wrap(other)
        out = self.data + other.data
        return Tensor._make(out, (self, other), lambda g: (
            _unbroadcast(g, self.shape), _unbroadcast(g, other.shape)))

    __radd__ = __add__

    def __sub__(self, other) -> "Tensor":
        other = _wrap(other)
        out = self.data - other.data
        return Tensor._make(out, (self, other), lambda g: (
            _unbroadcast(g, self.shape), _unbroadcast(-g, other.shape)))

    def __rsub__(self, other) -> "Tensor":
        return _wrap(other) - self

    def __mul__(self, other) -> "Tensor":
        other = _wrap(other)
        out = self.data * other.data
        return Tensor._make(out, (self, other), lambda g: (
            _unbroadcast(g * other.data, self.shape),
            _unbroadcast(g * self.data, other.shape)))

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        other = _wrap(other)
        out = self.data / other.data
        return Tensor._make(out, (self, other), lambda g: (
            _unbroadcast(g / other.data, self.shape),
            _unbroadcast(-g * self.data / (other.data * other.data), other.shape)))

    def __rtruediv__(self, other) -> "Tensor":
        return _wrap(other) / self

    def __neg__(self) -> "Tensor":
        return Tensor._make(-self.data, (self,), lambda g: (-g,))

    def __pow__(self, exponent: float) -> "Tensor":
        out = self.data ** exponent
        return Tensor._make(out, (self,), lambda g: (
            g * exponent * self.data ** (exponent - 1),))

    def __matmul__(self, other: "Tensor") -> "Tensor":
        out = self.data @ other.data
        return Tensor._make(out, (self, other), lambda g: (
            g @ other.data.T, self.data.T @ g))

    # ---- shape ---------------------------------------------------------

    def reshape(self, *shape) -> "Tensor":
        old = self.shape
        return Tensor._make(self.data.reshape(*shape), (self,),
                            lambda g: (g.reshape(old),))

    @property
    def T(self) -> "Tensor":
        return Tensor._make(self.data.T, (self,), lambda g: (g.T,))

    def __getitem__(self, key) -> "Tensor":
        def vjp(g):
            full = np.zeros_like(self.data)
            np.add.at(full, key, g)
            return (full,)
        return Tensor._make(self.data[key], (self,), vjp)

    # ---- reductions ----------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False) -> "Tensor":
        out = self.data.sum(axis=axis, keepdims=keepdims)

        def vjp(g):
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis)
            return (np.broadcast_to(g, self.shape).copy(),)
        return Tensor._make(out, (self,), vjp)

    def mean(self, axis=None, keepdims: bool = False) -> "Tensor":
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / n)

    # ---- elementwise nonlinearities -------------------------------------

    def exp(self) -> "Tensor":
        out = np.exp(self.data)
        return Tensor._make(out, (self,), lambda g: (g * out,))

    def log(self) -> "Tensor":
        return Tensor._make(np.log(self.data), (self,),
                            lambda g: (g / self.data,))

    def sqrt(self) -> "Tensor":
        out = np.sqrt(self.data)
        return Tensor._make(out, (self,), lambda g: (g * 0.5 / out,))

    def tanh(self) -> "Tensor":
        out = np.tanh(self.data)
        return Tensor._make(out, (self,), lambda g: (g * (1.0 - out * out),))

    def relu(self) -> "Tensor":
        out = np.maximum(self.data, 0.0)
        return Tensor._make(out, (self,),
                            lambda g: (g * (self.data > 0.0),))

    def sigmoid(self) -> "Tensor":
        out = _sigmoid(self.data)
        return Tensor._make(out, (self,), lambda g: (g * out * (1.0 - out),))


def _wrap(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(np.asarray(value))


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def tensor(data, requires_grad: bool = False) -> Tensor:
    return Tensor(np.asarray(data, dtype=np.float64), requires_grad)


def zeros(*shape, requires_grad: bool = False) -> Tensor:
    return Tensor(np.zeros(shape), requires_grad)


# ---- structural ops ------------------------------------------------------


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    datas = [t.data for t in tensors]
    out = np.concatenate(datas, axis=axis)
    sizes = [d.shape[axis] for d in datas]
    splits = np.cumsum(sizes)[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=axis))
    return Tensor._make(out, tuple(tensors), vjp)


def gather_rows(src: Tensor, idx: np.ndarray) -> Tensor:
    idx = np.ascontiguousarray(idx, dtype=np.int64)
    out = kernels.gather_rows(src.data, idx)

    def vjp(g):
        full = np.zeros_like(src.data)
        kernels.scatter_add_rows(full, idx, np.ascontiguousarray(g))
        return (full,)
    return Tensor._make(out, (src,), vjp)


def segment_sum(src: Tensor, seg: np.ndarray, n_seg: int) -> Tensor:
    seg = np.ascontiguousarray(seg, dtype=np.int64)
    out = np.zeros((n_seg, src.data.shape[1]))
    kernels.scatter_add_rows(out, seg, src.data)
    return Tensor._make(out, (src,),
                        lambda g: (kernels.gather_rows(g, seg),))


def segment_mean(src: Tensor, seg: np.ndarray, n_seg: int) -> Tensor:
    seg = np.ascontiguousarray(seg, dtype=np.int64)
    counts = np.bincount(seg, minlength=n_seg).astype(np.float64)
    counts = np.maximum(counts, 1.0)[:, None]
    out = np.zeros((n_seg, src.data.shape[1]))
    kernels.scatter_add_rows(out, seg, src.data)
    out /= counts

    def vjp(g):
        return (kernels.gather_rows(g / counts, seg),)
    return Tensor._make(out, (src,), vjp)


def segment_max(src: Tensor, seg: np.ndarray, n_seg: int) -> Tensor:
    """Column max per segment; ties route the gradient to the first row.

    Empty segments yield 0 and receive no gradient.
    """
    seg = np.ascontiguousarray(seg, dtype=np.int64)
    mx, arg = kernels.segment_max(src.data, seg, n_seg)
    empty = arg == src.data.shape[0]
    mx = np.where(empty, 0.0, mx)

    def vjp(g):
        full = np.zeros_like(src.data)
        rows, cols = np.nonzero(~empty)
        np.add.at(full, (arg[rows, cols], cols), g[rows, cols])
        return (full,)
    return Tensor._make(mx, (src,), vjp)


def segment_softmax(src: Tensor, seg: np.ndarray, n_seg: int) -> Tensor:
    """Softmax over rows that share a segment id, columnwise."""
    seg = np.ascontiguousarray(seg, dtype=np.int64)
    mx, _ = kernels.segment_max(src.data, seg, n_seg)
    shifted = src - Tensor(mx[seg])
    ex = shifted.exp()
    denom = segment_sum(ex, seg, n_seg)
    return ex / gather_rows(denom, seg)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    ex = np.exp(shifted)
    out = ex / ex.sum(axis=axis, keepdims=True)

    def vjp(g):
        dot = (g * out).sum(axis=axis, keepdims=True)
        return ((g - dot) * out,)
    return Tensor._make(out, (x,), vjp)


def log_softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def vjp(g):
        soft = np.exp(out)
        return (g - soft * g.sum(axis=axis, keepdims=True),)
    return Tensor._make(out, (x,), vjp)


def cross_entropy(logits: Tensor, targets: np.ndarray,
                  reduction: str = "mean") -> Tensor:
    """Negative log likelihood of integer targets under row softmax."""
    if reduction not in ("mean", "sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    targets = np.asarray(targets, dtype=np.int64)
    n = logits.data.shape[0]
    if targets.min(initial=0) < 0 or targets.max(initial=0) >= logits.data.shape[1]:
        raise IndexError("class index out of range")
    logp = log_softmax(logits, axis=-1)
    picked = logp[np.arange(n), targets]
    return -picked.mean() if reduction == "mean" else -picked.sum()


def bce_with_logits(logits: Tensor, targets: np.ndarray,
                    pos_weight: float = 1.0,
                    reduction: str = "mean") -> Tensor:
    """Binary cross entropy computed stably from logits."""
    if reduction not in ("mean", "sum"):
        raise ValueError(f"unknown reduction {reduction!r}")
    t = np.asarray(targets, dtype=np.float64)
    x = logits.data
    # log(1 + e^-|x|) + max(x, 0) equals log(1 + e^x) for either sign
    softplus = np.log1p(np.exp(-np.abs(x))) + np.maximum(x, 0.0)
    w = 1.0 + (pos_weight - 1.0) * t
    loss = w * (softplus - x * t)
    denom = float(loss.size) if reduction == "mean" else 1.0
    out = np.asarray(loss.sum() / denom)

    def vjp(g):
        return (g * w * (_sigmoid(x) - t) / denom,)
    return Tensor._make(out, (logits,), vjp)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor,
               eps: float = 1e-5) -> Tensor:
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    out = gamma.data * xhat + beta.data

    def vjp(g):
        dgamma = _unbroadcast(g * xhat, gamma.shape)
        dbeta = _unbroadcast(g, beta.shape)
        dxhat = g * gamma.data
        m1 = dxhat.mean(axis=-1, keepdims=True)
        m2 = (dxhat * xhat).mean(axis=-1, keepdims=True)
        dx = inv * (dxhat - m1 - xhat * m2)
        return (dx, dgamma, dbeta)
    return Tensor._make(out, (x, gamma, beta), vjp)


def dropout(x: Tensor, p: float, rng: Optional[np.random.Generator] = None,
            training: bool = False) -> Tensor:
    if not training or p <= 0.0:
        return x
    if rng is None:
        raise ValueError("dropout in training mode needs a generator")
    mask = (rng.random(x.shape) >= p) / (1.0 - p)
    return x * Tensor(mask)
