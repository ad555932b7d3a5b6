"""Dense float64 tensors with a reverse-mode gradient tape.

Every op records a backward closure on its output; ``backward()`` on a
scalar loss runs the tape in reverse topological order and accumulates
gradients additively into every reachable tensor that requires them.
Tensors are treated as immutable once produced by an op; the tape is
meant to live on a single training thread.
"""

from __future__ import annotations

import numpy as np

COS_EPS = 1e-8  # denominator guard for cosine; makes zero vectors map to 0


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


def _as_array(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim > 3:
        raise ShapeError(f"rank {arr.ndim} > 3 not supported (shape {arr.shape})")
    if arr.ndim > 0 and arr.size == 0:
        raise ShapeError(f"zero-sized dimension in shape {arr.shape}")
    return arr


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.requires_grad = requires_grad
        self.grad = np.zeros_like(self.data) if requires_grad else None
        self._backward = None
        self._parents = ()

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def item(self) -> float:
        return float(self.data)

    def zero_grad(self):
        if self.grad is not None:
            self.grad[...] = 0.0

    def check_finite(self):
        if not np.all(np.isfinite(self.data)):
            raise ValueError("tensor contains NaN/Inf entries")
        return self

    def __repr__(self):
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar; scalars and arrays are wrapped as constant tensors
    def __add__(self, other):
        return add(self, _wrap(other))

    def __radd__(self, other):
        return add(_wrap(other), self)

    def __sub__(self, other):
        return sub(self, _wrap(other))

    def __rsub__(self, other):
        return sub(_wrap(other), self)

    def __mul__(self, other):
        return mul(self, _wrap(other))

    def __rmul__(self, other):
        return mul(_wrap(other), self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, _wrap(other))

    def backward(self):
        """Reverse-mode sweep from a scalar; see module docstring."""
        if self.data.ndim != 0:
            raise ShapeError(f"backward() needs a scalar, got shape {self.shape}")
        if not self.requires_grad:
            return  # constant loss: nothing on the tape depends on parameters
        # iterative postorder: recursion would overflow on long GRU chains
        topo = []
        visited = set()
        stack = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        self.grad = self.grad + 1.0
        for node in reversed(topo):
            if node._backward is not None:
                node._backward()


def _wrap(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


_grad_enabled = [True]


class no_grad:
    """Context manager that suppresses tape recording (evaluation passes)."""

    def __enter__(self):
        _grad_enabled.append(False)
        return self

    def __exit__(self, *exc):
        _grad_enabled.pop()
        return False


def _make(data, parents, backward) -> Tensor:
    """Build an op output; the tape entry exists only if a parent needs grads."""
    out = Tensor.__new__(Tensor)
    out.data = data
    if _grad_enabled[-1] and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out.grad = np.zeros_like(data)
        out._parents = tuple(parents)
        out._backward = backward
    else:
        out.requires_grad = False
        out.grad = None
        out._parents = ()
        out._backward = None
    return out


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Sum grad over axes that were broadcast to reach ``shape``."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


# ---------------------------------------------------------------------------
# elementwise ops

def add(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data + b.data

    def _bw():
        if a.requires_grad:
            a.grad += _unbroadcast(out.grad, a.data.shape)
        if b.requires_grad:
            b.grad += _unbroadcast(out.grad, b.data.shape)

    out = _make(out_data, (a, b), _bw)
    return out


def sub(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data - b.data

    def _bw():
        if a.requires_grad:
            a.grad += _unbroadcast(out.grad, a.data.shape)
        if b.requires_grad:
            b.grad -= _unbroadcast(out.grad, b.data.shape)

    out = _make(out_data, (a, b), _bw)
    return out


def neg(a: Tensor) -> Tensor:
    def _bw():
        a.grad -= out.grad

    out = _make(-a.data, (a,), _bw)
    return out


def mul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data * b.data

    def _bw():
        if a.requires_grad:
            a.grad += _unbroadcast(out.grad * b.data, a.data.shape)
        if b.requires_grad:
            b.grad += _unbroadcast(out.grad * a.data, b.data.shape)

    out = _make(out_data, (a, b), _bw)
    return out


def relu(a: Tensor) -> Tensor:
    out_data = np.maximum(a.data, 0.0)

    def _bw():
        a.grad += out.grad * (a.data > 0.0)

    out = _make(out_data, (a,), _bw)
    return out


def sigmoid(a: Tensor) -> Tensor:
    out_data = 1.0 / (1.0 + np.exp(-a.data))

    def _bw():
        a.grad += out.grad * out_data * (1.0 - out_data)

    out = _make(out_data, (a,), _bw)
    return out


def tanh(a: Tensor) -> Tensor:
    out_data = np.tanh(a.data)

    def _bw():
        a.grad += out.grad * (1.0 - out_data * out_data)

    out = _make(out_data, (a,), _bw)
    return out


def exp(a: Tensor) -> Tensor:
    out_data = np.exp(a.data)

    def _bw():
        a.grad += out.grad * out_data

    out = _make(out_data, (a,), _bw)
    return out


# ---------------------------------------------------------------------------
# linear algebra

def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim == 0 or b.data.ndim == 0:
        raise ShapeError("matmul needs rank >= 1 operands")
    a_inner = a.data.shape[-1]
    b_inner = b.data.shape[0]
    if a_inner != b_inner:
        raise ShapeError(
            f"matmul inner dims differ: {a.data.shape} @ {b.data.shape}"
        )
    out_data = a.data @ b.data

    def _bw():
        g = out.grad
        if a.data.ndim == 2 and b.data.ndim == 2:
            if a.requires_grad:
                a.grad += g @ b.data.T
            if b.requires_grad:
                b.grad += a.data.T @ g
        elif a.data.ndim == 2 and b.data.ndim == 1:
            if a.requires_grad:
                a.grad += np.outer(g, b.data)
            if b.requires_grad:
                b.grad += a.data.T @ g
        elif a.data.ndim == 1 and b.data.ndim == 2:
            if a.requires_grad:
                a.grad += g @ b.data.T
            if b.requires_grad:
                b.grad += np.outer(a.data, g)
        else:  # vector . vector
            if a.requires_grad:
                a.grad += g * b.data
            if b.requires_grad:
                b.grad += g * a.data

    out = _make(out_data, (a, b), _bw)
    return out


def transpose(a: Tensor) -> Tensor:
    if a.data.ndim != 2:
        raise ShapeError(f"transpose needs a matrix, got shape {a.shape}")

    def _bw():
        a.grad += out.grad.T

    out = _make(a.data.T.copy(), (a,), _bw)
    return out


# ---------------------------------------------------------------------------
# reductions and reshaping

def tensor_sum(a: Tensor) -> Tensor:
    def _bw():
        a.grad += out.grad

    out = _make(np.asarray(a.data.sum()), (a,), _bw)
    return out


def mean_rows(a: Tensor) -> Tensor:
    """Column means of an (L, d) matrix -> (d,)."""
    if a.data.ndim != 2:
        raise ShapeError(f"mean_rows needs a matrix, got shape {a.shape}")
    n = a.data.shape[0]
    out_data = a.data.mean(axis=0)

    def _bw():
        a.grad += out.grad[None, :] / n

    out = _make(out_data, (a,), _bw)
    return out


def concat(parts) -> Tensor:
    """Concatenate rank-1 tensors into one vector."""
    parts = [_wrap(p) for p in parts]
    for p in parts:
        if p.data.ndim != 1:
            raise ShapeError(f"concat takes vectors, got shape {p.shape}")
    out_data = np.concatenate([p.data for p in parts])
    offsets = np.cumsum([0] + [p.data.shape[0] for p in parts])

    def _bw():
        for p, lo, hi in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                p.grad += out.grad[lo:hi]

    out = _make(out_data, tuple(parts), _bw)
    return out


def stack_rows(rows) -> Tensor:
    """Stack rank-1 tensors of equal length into an (L, d) matrix."""
    rows = [_wrap(r) for r in rows]
    out_data = np.stack([r.data for r in rows])

    def _bw():
        for i, r in enumerate(rows):
            if r.requires_grad:
                r.grad += out.grad[i]

    out = _make(out_data, tuple(rows), _bw)
    return out


def row(a: Tensor, i: int) -> Tensor:
    """Row i of a matrix as a vector."""
    if a.data.ndim != 2:
        raise ShapeError(f"row() needs a matrix, got shape {a.shape}")
    out_data = a.data[i].copy()

    def _bw():
        a.grad[i] += out.grad

    out = _make(out_data, (a,), _bw)
    return out


def narrow(a: Tensor, lo: int, hi: int) -> Tensor:
    """Contiguous slice [lo:hi) of a vector."""
    if a.data.ndim != 1:
        raise ShapeError(f"narrow() needs a vector, got shape {a.shape}")
    out_data = a.data[lo:hi].copy()

    def _bw():
        a.grad[lo:hi] += out.grad

    out = _make(out_data, (a,), _bw)
    return out


# ---------------------------------------------------------------------------
# normalization / similarity

def rowwise_softmax(s: Tensor) -> Tensor:
    """Softmax along the last axis of a matrix, max-stabilized per row."""
    if s.data.ndim != 2:
        raise ShapeError(f"rowwise_softmax needs a matrix, got shape {s.shape}")
    shifted = s.data - s.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=1, keepdims=True)

    def _bw():
        g = out.grad
        dot = (g * out_data).sum(axis=1, keepdims=True)
        s.grad += out_data * (g - dot)

    out = _make(out_data, (s,), _bw)
    return out


def fro_norm(a: Tensor) -> Tensor:
    """Euclidean norm of all entries (vector 2-norm / matrix Frobenius norm).

    The gradient at the origin is defined as 0 (subgradient choice).
    """
    value = float(np.sqrt(np.sum(a.data * a.data)))

    def _bw():
        if value > 0.0:
            a.grad += out.grad * (a.data / value)

    out = _make(np.asarray(value), (a,), _bw)
    return out


def _cosine_kernel(x: np.ndarray, y: np.ndarray):
    """Shared forward/backward pieces for row cosines.

    Returns (cos, and the per-row quantities needed by the backward pass).
    """
    dots = (x * y).sum(axis=-1)
    nx = np.sqrt((x * x).sum(axis=-1))
    ny = np.sqrt((y * y).sum(axis=-1))
    denom = nx * ny + COS_EPS
    return dots / denom, dots, nx, ny, denom


def _cosine_grad(g, x, y, cos, nx, ny, denom):
    # d cos / dx = y / denom - cos * ny * x / (nx * denom); the second term
    # vanishes for (near-)zero x, matching the subgradient at the origin.
    gx = y / denom[..., None]
    safe = nx > 1e-300
    scale = np.where(safe, cos * ny / (np.where(safe, nx, 1.0) * denom), 0.0)
    gx = gx - scale[..., None] * x
    return g[..., None] * gx


def cosine(u: Tensor, v: Tensor) -> Tensor:
    """Cosine similarity of two vectors; zero vectors yield 0 via COS_EPS."""
    if u.data.ndim != 1 or v.data.ndim != 1 or u.data.shape != v.data.shape:
        raise ShapeError(f"cosine needs equal-length vectors, got {u.shape} and {v.shape}")
    cos, dots, nx, ny, denom = _cosine_kernel(u.data, v.data)

    def _bw():
        g = np.asarray(out.grad)
        if u.requires_grad:
            u.grad += _cosine_grad(g, u.data, v.data, cos, nx, ny, denom)
        if v.requires_grad:
            v.grad += _cosine_grad(g, v.data, u.data, cos, ny, nx, denom)

    out = _make(np.asarray(cos), (u, v), _bw)
    return out


def rowwise_cosine(x: Tensor, y: Tensor) -> Tensor:
    """Per-row cosine of two (L, d) matrices -> (L,)."""
    if x.data.shape != y.data.shape or x.data.ndim != 2:
        raise ShapeError(f"rowwise_cosine needs equal-shape matrices, got {x.shape} and {y.shape}")
    cos, dots, nx, ny, denom = _cosine_kernel(x.data, y.data)

    def _bw():
        g = out.grad
        if x.requires_grad:
            x.grad += _cosine_grad(g, x.data, y.data, cos, nx, ny, denom)
        if y.requires_grad:
            y.grad += _cosine_grad(g, y.data, x.data, cos, ny, nx, denom)

    out = _make(cos, (x, y), _bw)
    return out


def gru_step(xz_all: Tensor, xr_all: Tensor, xh_all: Tensor, j: int,
             h: Tensor, U_z: Tensor, U_r: Tensor, U_h: Tensor) -> Tensor:
    """One fused gated-recurrence update: h' = (1-z)*h + z*c.

    z = sigm(xz_all[j] + U_z h), r = sigm(xr_all[j] + U_r h),
    c = tanh(xh_all[j] + U_h (r*h)). The x*_all matrices are the batched
    input projections for the whole sequence (bias already added); j picks
    the current token. Equivalent to composing ~16 primitive ops per token
    but recorded as a single tape node, which keeps long recurrences cheap.
    """
    if h.data.ndim != 1:
        raise ShapeError(f"gru_step needs a vector state, got shape {h.shape}")
    d = h.data.shape[0]
    for name, m in (("xz_all", xz_all), ("xr_all", xr_all), ("xh_all", xh_all)):
        if m.data.ndim != 2 or m.data.shape[1] != d:
            raise ShapeError(f"{name} must be (N, {d}), got {m.shape}")
    for name, m in (("U_z", U_z), ("U_r", U_r), ("U_h", U_h)):
        if m.data.shape != (d, d):
            raise ShapeError(f"{name} must be ({d}, {d}), got {m.shape}")
    if not 0 <= j < xz_all.data.shape[0]:
        raise ShapeError(f"token index {j} out of range for {xz_all.data.shape[0]} rows")

    h_prev = h.data
    z = 1.0 / (1.0 + np.exp(-(xz_all.data[j] + U_z.data @ h_prev)))
    r = 1.0 / (1.0 + np.exp(-(xr_all.data[j] + U_r.data @ h_prev)))
    rh = r * h_prev
    c = np.tanh(xh_all.data[j] + U_h.data @ rh)
    out_data = h_prev + z * (c - h_prev)

    def _bw():
        g = out.grad
        da_c = (g * z) * (1.0 - c * c)
        grh = U_h.data.T @ da_c
        da_z = (g * (c - h_prev)) * z * (1.0 - z)
        da_r = (grh * h_prev) * r * (1.0 - r)
        if xz_all.requires_grad:
            xz_all.grad[j] += da_z
        if xr_all.requires_grad:
            xr_all.grad[j] += da_r
        if xh_all.requires_grad:
            xh_all.grad[j] += da_c
        if h.requires_grad:
            h.grad += g * (1.0 - z) + grh * r + U_z.data.T @ da_z + U_r.data.T @ da_r
        if U_z.requires_grad:
            U_z.grad += np.outer(da_z, h_prev)
        if U_r.requires_grad:
            U_r.grad += np.outer(da_r, h_prev)
        if U_h.requires_grad:
            U_h.grad += np.outer(da_c, rh)

    out = _make(out_data, (xz_all, xr_all, xh_all, h, U_z, U_r, U_h), _bw)
    return out


def cross_entropy_logits(logits: Tensor, label: int) -> Tensor:
    """-log softmax(logits)[label], computed via log-sum-exp."""
    if logits.data.ndim != 1:
        raise ShapeError(f"cross_entropy_logits needs a vector, got shape {logits.shape}")
    if not 0 <= label < logits.data.shape[0]:
        raise ValueError(f"label {label} out of range for {logits.data.shape[0]} classes")
    z = logits.data
    m = z.max()
    lse = m + np.log(np.exp(z - m).sum())
    probs = np.exp(z - lse)

    def _bw():
        g = probs.copy()
        g[label] -= 1.0
        logits.grad += out.grad * g

    out = _make(np.asarray(lse - z[label]), (logits,), _bw)
    return out
