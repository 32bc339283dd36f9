"""Dense-tensor kernel with recorded reverse-mode differentiation.

Every network and loss computation in this package is assembled from the
primitives defined here. Values are float64 throughout so that central
finite differences are a reliable oracle for the adjoints. Forward
evaluation is deterministic: identical inputs give bit-identical outputs.

An operation is recorded only when one of its inputs requires gradients,
so inference on constant inputs builds no graph. `backward` traces the
tape reachable from a scalar loss and replays the adjoints in reverse
visit order.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import InputError

ACTIVATIONS = ("none", "relu", "sigmoid", "tanh")

# Test hook: set to an op name ("sigmoid") to deliberately corrupt that
# op's adjoint. Used only by the gradcheck fault-injection test.
_CORRUPT_ADJOINT: str | None = None


class Tensor:
    """Dense float64 array participating in a recorded computation."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_vjp")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents: tuple[Tensor, ...] = ()
        self._vjp: Callable[[np.ndarray], tuple] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, neg(_as_tensor(other)))

    def __rsub__(self, other):
        return add(neg(self), other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, idx):
        return take(self, idx)

    # -- elementwise / reductions -------------------------------------------

    def relu(self):
        return relu(self)

    def sigmoid(self):
        return sigmoid(self)

    def tanh(self):
        return tanh(self)

    def abs(self):
        return absolute(self)

    def square(self):
        return mul(self, self)

    def sum(self):
        return total(self)

    def mean(self):
        return mean(self)

    def reshape(self, shape):
        return reshape(self, shape)


class Tape:
    """Ordered record of the operations reachable from one output tensor.

    The order is topological (producers before consumers), so replaying
    the adjoints in reverse visit order accumulates exactly the chain-rule
    gradient of the output with respect to every recorded tensor.
    """

    def __init__(self, nodes: list[Tensor]):
        self.nodes = nodes

    @classmethod
    def trace(cls, output: Tensor) -> "Tape":
        order: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(output, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        return cls(order)

    def replay(self, output: Tensor, seed: np.ndarray | None = None) -> None:
        grads: dict[int, np.ndarray] = {
            id(output): np.ones_like(output.data) if seed is None else seed
        }
        for node in reversed(self.nodes):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if node.requires_grad:
                node.grad = g if node.grad is None else node.grad + g
            if node._vjp is None:
                continue
            for parent, pg in zip(node._parents, node._vjp(g)):
                if pg is None:
                    continue
                pid = id(parent)
                grads[pid] = pg if pid not in grads else grads[pid] + pg


def backward(loss: Tensor) -> None:
    """Populate `.grad` on every requires_grad tensor reachable from `loss`."""
    if loss.size != 1:
        raise InputError(f"backward needs a scalar loss, got shape {loss.shape}")
    Tape.trace(loss).replay(loss)


def zero_grads(tensors) -> None:
    for t in tensors:
        t.grad = None


# -- helpers ------------------------------------------------------------------


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _record(data: np.ndarray, parents: Sequence[Tensor], vjp) -> Tensor:
    out = Tensor(data)
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._vjp = vjp
    return out


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra > 0:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


# -- elementwise primitives ----------------------------------------------------


def add(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    return _record(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    return _record(
        a.data * b.data,
        (a, b),
        lambda g: (
            _unbroadcast(g * b.data, a.data.shape),
            _unbroadcast(g * a.data, b.data.shape),
        ),
    )


def neg(a) -> Tensor:
    a = _as_tensor(a)
    return _record(-a.data, (a,), lambda g: (-g,))


def relu(a) -> Tensor:
    a = _as_tensor(a)
    mask = a.data > 0
    return _record(a.data * mask, (a,), lambda g: (g * mask,))


def sigmoid(a) -> Tensor:
    a = _as_tensor(a)
    s = 1.0 / (1.0 + np.exp(-a.data))

    def vjp(g):
        gg = g * s * (1.0 - s)
        if _CORRUPT_ADJOINT == "sigmoid":
            gg = gg * 1.5
        return (gg,)

    return _record(s, (a,), vjp)


def tanh(a) -> Tensor:
    a = _as_tensor(a)
    t = np.tanh(a.data)
    return _record(t, (a,), lambda g: (g * (1.0 - t * t),))


def absolute(a) -> Tensor:
    a = _as_tensor(a)
    sign = np.sign(a.data)
    return _record(np.abs(a.data), (a,), lambda g: (g * sign,))


def total(a) -> Tensor:
    a = _as_tensor(a)
    return _record(a.data.sum(), (a,), lambda g: (np.broadcast_to(g, a.data.shape).copy(),))


def mean(a) -> Tensor:
    a = _as_tensor(a)
    n = a.size
    return _record(
        a.data.mean(), (a,), lambda g: (np.broadcast_to(g / n, a.data.shape).copy(),)
    )


# -- structural primitives -----------------------------------------------------


def matmul(a, b) -> Tensor:
    a, b = _as_tensor(a), _as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise InputError(f"matmul needs 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise InputError(f"matmul inner dimensions disagree: {a.shape} @ {b.shape}")
    return _record(
        a.data @ b.data,
        (a, b),
        lambda g: (g @ b.data.T, a.data.T @ g),
    )


def take(a, idx) -> Tensor:
    """Basic (int/slice) indexing with gradient scatter."""
    a = _as_tensor(a)
    data = a.data[idx]

    def vjp(g):
        ga = np.zeros_like(a.data)
        ga[idx] += g
        return (ga,)

    return _record(data, (a,), vjp)


def reshape(a, shape) -> Tensor:
    a = _as_tensor(a)
    old = a.data.shape
    return _record(a.data.reshape(shape), (a,), lambda g: (g.reshape(old),))


def pad_rows(a, before: int, after: int) -> Tensor:
    """Zero-pad a 2-D tensor along the first (temporal) axis."""
    a = _as_tensor(a)
    if a.ndim != 2:
        raise InputError(f"pad_rows needs a 2-D tensor, got {a.shape}")
    if before < 0 or after < 0:
        raise InputError("pad widths must be nonnegative")
    rows = a.shape[0]
    data = np.pad(a.data, ((before, after), (0, 0)))
    return _record(data, (a,), lambda g: (g[before:before + rows],))


def concatenate(tensors, axis: int) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    if not tensors:
        raise InputError("concatenate needs at least one tensor")
    ndim = tensors[0].ndim
    ax = axis if axis >= 0 else axis + ndim
    if not 0 <= ax < ndim:
        raise InputError(f"concatenate axis {axis} out of range for ndim {ndim}")
    base = list(tensors[0].shape)
    for t in tensors[1:]:
        other = list(t.shape)
        if len(other) != ndim or any(
            other[i] != base[i] for i in range(ndim) if i != ax
        ):
            raise InputError(
                f"concatenate extent mismatch off axis {ax}: {base} vs {other}"
            )
    data = np.concatenate([t.data for t in tensors], axis=ax)
    splits = np.cumsum([t.shape[ax] for t in tensors])[:-1]

    def vjp(g):
        return tuple(np.split(g, splits, axis=ax))

    return _record(data, tensors, vjp)


def concat(a, b, axis: int) -> Tensor:
    """Join two tensors along `axis`; backward splits the gradient."""
    return concatenate([a, b], axis)


def stack(tensors, axis: int = 0) -> Tensor:
    tensors = [_as_tensor(t) for t in tensors]
    shapes = {t.shape for t in tensors}
    if len(shapes) != 1:
        raise InputError(f"stack needs equal shapes, got {sorted(shapes)}")
    data = np.stack([t.data for t in tensors], axis=axis)
    ax = axis if axis >= 0 else axis + data.ndim

    def vjp(g):
        return tuple(np.take(g, i, axis=ax) for i in range(len(tensors)))

    return _record(data, tensors, vjp)


def pool(a, axis: int, mode: str) -> Tensor:
    """Reduce one axis by max or mean.

    Max routes the gradient to the first maximal element along the axis;
    mean distributes it uniformly.
    """
    a = _as_tensor(a)
    if a.ndim == 0:
        raise InputError("pool needs at least one axis")
    ax = axis if axis >= 0 else axis + a.ndim
    if not 0 <= ax < a.ndim:
        raise InputError(f"pool axis {axis} out of range for shape {a.shape}")
    extent = a.shape[ax]
    if extent == 0:
        raise InputError("pool over an empty axis")
    if mode == "max":
        idx = np.expand_dims(a.data.argmax(axis=ax), ax)

        def vjp(g):
            ga = np.zeros_like(a.data)
            np.put_along_axis(ga, idx, np.expand_dims(g, ax), ax)
            return (ga,)

        return _record(a.data.max(axis=ax), (a,), vjp)
    if mode == "mean":

        def vjp(g):
            return (np.repeat(np.expand_dims(g / extent, ax), extent, axis=ax),)

        return _record(a.data.mean(axis=ax), (a,), vjp)
    raise InputError(f"unknown pool mode {mode!r}")


def adaptive_mean_rows(a, out_len: int) -> Tensor:
    """Mean-pool the rows of a 2-D tensor into `out_len` floor-formula bins.

    Bin i covers input rows [floor(i*L/out_len), floor((i+1)*L/out_len)).
    Requires out_len <= L so every bin is nonempty.
    """
    a = _as_tensor(a)
    if a.ndim != 2:
        raise InputError(f"adaptive_mean_rows needs a 2-D tensor, got {a.shape}")
    rows = a.shape[0]
    if not 1 <= out_len <= rows:
        raise InputError(f"cannot pool {rows} rows into {out_len} bins")
    bins = [(i * rows // out_len, (i + 1) * rows // out_len) for i in range(out_len)]
    data = np.stack([a.data[s:e].mean(axis=0) for s, e in bins])

    def vjp(g):
        ga = np.zeros_like(a.data)
        for i, (s, e) in enumerate(bins):
            ga[s:e] += g[i] / (e - s)
        return (ga,)

    return _record(data, (a,), vjp)


# -- composite building blocks ---------------------------------------------


def _activate(x: Tensor, activation: str) -> Tensor:
    if activation == "none":
        return x
    if activation == "relu":
        return relu(x)
    if activation == "sigmoid":
        return sigmoid(x)
    if activation == "tanh":
        return tanh(x)
    raise InputError(f"unknown activation {activation!r}")


def affine(x, weight, bias, activation: str = "none") -> Tensor:
    """Fully-connected layer: act(x @ weight + bias)."""
    x, weight, bias = _as_tensor(x), _as_tensor(weight), _as_tensor(bias)
    if activation not in ACTIVATIONS:
        raise InputError(f"unknown activation {activation!r}")
    if x.ndim != 2 or weight.ndim != 2 or bias.ndim != 1:
        raise InputError(
            f"affine expects (L,C) @ (C,K) + (K,), got {x.shape}, {weight.shape}, {bias.shape}"
        )
    if weight.shape[1] != bias.shape[0]:
        raise InputError(
            f"affine bias width {bias.shape[0]} != output width {weight.shape[1]}"
        )
    return _activate(add(matmul(x, weight), bias), activation)


def conv1d(x, weight, bias, dilation: int = 1) -> Tensor:
    """Dilated 1-D convolution over the rows of x with same-zero padding.

    `weight` has shape (k, c_in, c_out); output length equals input length;
    the receptive span per layer is (k-1)*dilation + 1.
    """
    x, weight, bias = _as_tensor(x), _as_tensor(weight), _as_tensor(bias)
    if weight.ndim != 3:
        raise InputError(f"conv1d weight must be (k, c_in, c_out), got {weight.shape}")
    k, c_in, c_out = weight.shape
    if k < 1:
        raise InputError(f"conv1d kernel size must be >= 1, got {k}")
    if dilation < 1:
        raise InputError(f"conv1d dilation must be >= 1, got {dilation}")
    if x.ndim != 2 or x.shape[1] != c_in:
        raise InputError(
            f"conv1d input {x.shape} does not match weight c_in={c_in}"
        )
    length = x.shape[0]
    if length < 1:
        raise InputError("conv1d needs at least one input row")
    span = (k - 1) * dilation
    left = span // 2
    padded = pad_rows(x, left, span - left) if span else x
    out = None
    for j in range(k):
        term = matmul(take(padded, slice(j * dilation, j * dilation + length)), weight[j])
        out = term if out is None else add(out, term)
    return add(out, bias)


def receptive_span(kernel_size: int, dilation: int) -> int:
    return (kernel_size - 1) * dilation + 1


def lstm_forward(seq, wx, wh, bias) -> Tensor:
    """Single-layer LSTM over the rows of `seq`, emitting every hidden state.

    Gate blocks in `wx`/`wh`/`bias` are ordered input, forget, candidate,
    output. Initial hidden and cell states are zero; no peepholes.
    """
    seq, wx, wh, bias = _as_tensor(seq), _as_tensor(wx), _as_tensor(wh), _as_tensor(bias)
    if seq.ndim != 2:
        raise InputError(f"lstm_forward expects (L, C) input, got {seq.shape}")
    if wx.ndim != 2 or wh.ndim != 2 or bias.ndim != 1:
        raise InputError("lstm_forward parameter shapes are invalid")
    hidden = wh.shape[0]
    if wx.shape[0] != seq.shape[1] or wx.shape[1] != 4 * hidden:
        raise InputError(
            f"lstm_forward wx {wx.shape} incompatible with input {seq.shape} and hidden {hidden}"
        )
    if wh.shape[1] != 4 * hidden or bias.shape[0] != 4 * hidden:
        raise InputError("lstm_forward wh/bias widths must be 4*hidden")
    h = Tensor(np.zeros((1, hidden)))
    c = Tensor(np.zeros((1, hidden)))
    outputs = []
    for t in range(seq.shape[0]):
        z = add(add(matmul(take(seq, slice(t, t + 1)), wx), matmul(h, wh)), bias)
        gate_in = sigmoid(take(z, (slice(None), slice(0, hidden))))
        gate_forget = sigmoid(take(z, (slice(None), slice(hidden, 2 * hidden))))
        candidate = tanh(take(z, (slice(None), slice(2 * hidden, 3 * hidden))))
        gate_out = sigmoid(take(z, (slice(None), slice(3 * hidden, 4 * hidden))))
        c = add(mul(gate_forget, c), mul(gate_in, candidate))
        h = mul(gate_out, tanh(c))
        outputs.append(h)
    return concatenate(outputs, axis=0)


# -- verification ------------------------------------------------------------


def parameter_leaves(loss: Tensor) -> list[Tensor]:
    """Leaf tensors with requires_grad reachable from `loss`, in trace order."""
    return [
        node
        for node in Tape.trace(loss).nodes
        if node.requires_grad and not node._parents
    ]


def grad_check(build: Callable[[], Tensor], eps: float = 1e-5) -> float:
    """Compare analytic gradients of build() against central differences.

    `build` must reconstruct the scalar graph from the same persistent
    parameter tensors on every call. Returns the max over all parameter
    elements of |analytic - numeric| / max(1e-8, |numeric|).
    """
    loss = build()
    if loss.size != 1:
        raise InputError("grad_check needs a scalar-valued builder")
    params = parameter_leaves(loss)
    zero_grads(params)
    backward(loss)
    analytic = {id(p): (np.zeros_like(p.data) if p.grad is None else p.grad.copy()) for p in params}
    worst = 0.0
    for p in params:
        flat = p.data.reshape(-1)
        flat_analytic = analytic[id(p)].reshape(-1)
        for i in range(flat.size):
            saved = flat[i]
            flat[i] = saved + eps
            up = float(build().data)
            flat[i] = saved - eps
            down = float(build().data)
            flat[i] = saved
            numeric = (up - down) / (2.0 * eps)
            err = abs(flat_analytic[i] - numeric) / max(1e-8, abs(numeric))
            worst = max(worst, err)
    zero_grads(params)
    return worst


# -- parameter construction ---------------------------------------------------


def uniform_param(rng: np.random.Generator, shape, fan_in: int) -> Tensor:
    """Trainable tensor drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)]."""
    bound = 1.0 / np.sqrt(fan_in)
    return Tensor(rng.uniform(-bound, bound, size=shape), requires_grad=True)
