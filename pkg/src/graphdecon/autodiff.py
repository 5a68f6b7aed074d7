"""Reverse-mode differentiation over dense float64 matrices.

A deliberately small engine: exactly the operation set the autoencoder
needs, no broadcasting, no N-d tensors.  A :class:`Tape` records nodes in
creation order (which is topological by construction); :func:`backward`
replays the list once in reverse, accumulating vector-Jacobian products.

Sparse operands (propagation operators, Laplacians) are constants: they
enter through :func:`spmm` and never receive gradients.  The relu
subgradient at 0 is 0; tanh/sigmoid derivatives reuse the cached forward
output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp


class Tape:
    """Ordered record of differentiable operations for one forward pass."""

    __slots__ = ("nodes",)

    def __init__(self):
        self.nodes: list[Tensor] = []

    def tensor(self, value: np.ndarray) -> "Tensor":
        """Wrap an array as a leaf node (parameter or input)."""
        value = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(value)):
            raise ValueError("non-finite values entering the tape")
        return Tensor(value, self)

    def _record(self, value, parents, vjp) -> "Tensor":
        node = Tensor(np.asarray(value, dtype=np.float64), self)
        node.parents = parents
        node.vjp = vjp
        return node


class Tensor:
    """A value on a tape.  `grad` is populated by :func:`backward`."""

    __slots__ = ("value", "tape", "parents", "vjp", "grad")

    def __init__(self, value: np.ndarray, tape: Tape):
        self.value = value
        self.tape = tape
        self.parents: tuple[Tensor, ...] = ()
        self.vjp: Optional[Callable[[np.ndarray], tuple[np.ndarray, ...]]] = None
        self.grad: Optional[np.ndarray] = None
        tape.nodes.append(self)

    @property
    def shape(self):
        return self.value.shape


def _same_tape(*tensors: Tensor) -> Tape:
    tape = tensors[0].tape
    for t in tensors[1:]:
        if t.tape is not tape:
            raise ValueError("operands recorded on different tapes")
    return tape


def matmul(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape(a, b)
    if a.value.ndim != 2 or b.value.ndim != 2 or a.value.shape[1] != b.value.shape[0]:
        raise ValueError(f"matmul shapes {a.value.shape} x {b.value.shape}")
    av, bv = a.value, b.value
    return tape._record(av @ bv, (a, b), lambda g: (g @ bv.T, av.T @ g))


def add(a: Tensor, b: Tensor) -> Tensor:
    tape = _same_tape(a, b)
    if a.value.shape != b.value.shape:
        raise ValueError(f"add shapes {a.value.shape} != {b.value.shape}")
    return tape._record(a.value + b.value, (a, b), lambda g: (g, g))


def scalar_mul(c: float, x: Tensor) -> Tensor:
    c = float(c)
    return x.tape._record(c * x.value, (x,), lambda g: (c * g,))


def transpose(x: Tensor) -> Tensor:
    return x.tape._record(x.value.T.copy(), (x,), lambda g: (g.T,))


def relu(x: Tensor) -> Tensor:
    mask = x.value > 0
    return x.tape._record(np.where(mask, x.value, 0.0), (x,), lambda g: (g * mask,))


def tanh(x: Tensor) -> Tensor:
    y = np.tanh(x.value)
    return x.tape._record(y, (x,), lambda g: (g * (1.0 - y * y),))


def sigmoid(x: Tensor) -> Tensor:
    y = _sigmoid(x.value)
    return x.tape._record(y, (x,), lambda g: (g * y * (1.0 - y),))


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def row_softmax(x: Tensor) -> Tensor:
    if x.value.ndim != 2:
        raise ValueError("row_softmax expects a matrix")
    shifted = x.value - x.value.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=1, keepdims=True)

    def vjp(g):
        inner = (g * y).sum(axis=1, keepdims=True)
        return (y * (g - inner),)

    return x.tape._record(y, (x,), vjp)


def spmm(matrix: sp.spmatrix, x: Tensor) -> Tensor:
    """Product of a fixed sparse matrix with a tape value.

    The sparse operand is a constant of the computation (a propagation
    operator or Laplacian); only `x` is differentiated.
    """
    if x.value.ndim != 2 or matrix.shape[1] != x.value.shape[0]:
        raise ValueError(f"spmm shapes {matrix.shape} x {x.value.shape}")
    mt = matrix.T.tocsr()
    return x.tape._record(np.asarray(matrix @ x.value), (x,), lambda g: (np.asarray(mt @ g),))


def hstack(*tensors: Tensor) -> Tensor:
    """Column-concatenation (used to stack encoder layer outputs)."""
    tape = _same_tape(*tensors)
    rows = tensors[0].value.shape[0]
    if any(t.value.ndim != 2 or t.value.shape[0] != rows for t in tensors):
        raise ValueError("hstack expects matrices with equal row counts")
    widths = [t.value.shape[1] for t in tensors]
    offsets = np.cumsum([0] + widths)

    def vjp(g):
        return tuple(g[:, offsets[i]: offsets[i + 1]] for i in range(len(widths)))

    return tape._record(np.hstack([t.value for t in tensors]), tensors, vjp)


def _check_target(target: np.ndarray, shape) -> np.ndarray:
    target = np.asarray(target, dtype=np.float64)
    if target.shape != shape:
        raise ValueError(f"target shape {target.shape} != prediction shape {shape}")
    if not np.all(np.isfinite(target)):
        raise ValueError("non-finite target")
    return target


def mse_loss(pred: Tensor, target: np.ndarray) -> Tensor:
    """Mean squared error over all entries; returns a scalar node."""
    target = _check_target(target, pred.value.shape)
    diff = pred.value - target
    val = np.mean(diff * diff)
    scale = 2.0 / diff.size
    return pred.tape._record(val, (pred,), lambda g: (g * scale * diff,))


def masked_mse_loss(pred: Tensor, target: np.ndarray, mask: np.ndarray) -> Tensor:
    """MSE over entries where mask is nonzero; unobserved cells never touch
    the loss (they are multiplied by the 0 mask before squaring)."""
    target = _check_target(target, pred.value.shape)
    mask = np.asarray(mask, dtype=np.float64)
    if mask.shape != pred.value.shape:
        raise ValueError(f"mask shape {mask.shape} != prediction shape {pred.value.shape}")
    nobs = mask.sum()
    if nobs == 0:
        raise ValueError("masked_mse_loss needs at least one observed entry")
    diff = mask * (pred.value - target)
    val = np.sum(diff * diff) / nobs
    scale = 2.0 / nobs
    return pred.tape._record(val, (pred,), lambda g: (g * scale * mask * diff,))


def bce_loss(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Element-wise sigmoid cross-entropy against targets in [0, 1]."""
    targets = _check_target(targets, logits.value.shape)
    if targets.min() < 0.0 or targets.max() > 1.0:
        raise ValueError("bce targets must lie in [0, 1]")
    z = logits.value
    # stable: max(z,0) - z*t + log(1 + exp(-|z|))
    val = np.mean(np.maximum(z, 0.0) - z * targets + np.log1p(np.exp(-np.abs(z))))
    scale = 1.0 / z.size
    resid = _sigmoid(z) - targets
    return logits.tape._record(val, (logits,), lambda g: (g * scale * resid,))


def backward(tape: Tape, loss: Tensor) -> None:
    """Populate `.grad` on every tape node reachable from `loss`.

    Walks the recorded nodes once in reverse creation order, so each vjp
    fires exactly once with the fully accumulated output gradient.
    """
    if loss.tape is not tape:
        raise ValueError("loss was not recorded on this tape")
    if loss.value.ndim != 0 and loss.value.size != 1:
        raise ValueError("loss must be a scalar node")
    loss.grad = np.ones_like(loss.value)
    for node in reversed(tape.nodes):
        if node.grad is None or node.vjp is None:
            continue
        for parent, pgrad in zip(node.parents, node.vjp(node.grad)):
            if parent.grad is None:
                parent.grad = np.array(pgrad, dtype=np.float64)
            else:
                parent.grad = parent.grad + pgrad


@dataclass
class AdamState:
    """Adam optimizer state: per-parameter moment accumulators."""

    learning_rate: float = 0.01
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)


def adam_step(
    state: AdamState, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]
) -> dict[str, np.ndarray]:
    """One bias-corrected Adam update; returns the updated parameter dict."""
    state.step += 1
    t = state.step
    out = {}
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            out[name] = p
            continue
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape} for {name}")
        m = state.m.get(name, np.zeros_like(p))
        v = state.v.get(name, np.zeros_like(p))
        m = state.beta1 * m + (1.0 - state.beta1) * g
        v = state.beta2 * v + (1.0 - state.beta2) * (g * g)
        state.m[name] = m
        state.v[name] = v
        m_hat = m / (1.0 - state.beta1**t)
        v_hat = v / (1.0 - state.beta2**t)
        out[name] = p - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return out


def glorot(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    """Glorot-uniform initialization with bounds +/- sqrt(6/(fan_in+fan_out))."""
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out))


def finite_difference_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, step: float = 1e-5
) -> np.ndarray:
    """Central finite differences of a scalar function, entry by entry.

    The independent oracle for every gradient check in the test suite; it
    never touches the tape machinery.
    """
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    flat = x.ravel()
    gflat = grad.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        hi = f(x)
        flat[i] = orig - step
        lo = f(x)
        flat[i] = orig
        gflat[i] = (hi - lo) / (2.0 * step)
    return grad


def max_relative_error(
    analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-8
) -> float:
    """max |a - n| / max(|a|, |n|, floor), the gradient-check metric."""
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))
