"""Reverse-mode autodiff over dense numpy tensors.

Small tape-based engine: every op records its inputs and a backward
closure on the output tensor, and `backward` walks the tape in reverse
creation order. Only the primitives needed by the dialogue-manager
models are provided.
"""

from __future__ import annotations

import itertools

import numpy as np

_ids = itertools.count()

# Every op output is checked for NaN/Inf; a non-finite value anywhere is
# a bug (or divergence) and must surface immediately.
CHECK_FINITE = True


class ShapeError(ValueError):
    pass


class NonFiniteError(FloatingPointError):
    pass


class ConfigError(ValueError):
    pass


def _finite(arr, op):
    if CHECK_FINITE and not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"non-finite values in output of {op}")
    return arr


class Tensor:
    """Dense float array plus tape bookkeeping."""

    __slots__ = ("data", "grad", "requires_grad", "parents", "_backward", "tid", "name", "probs")

    def __init__(self, data, requires_grad=False, name=None):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = requires_grad
        self.parents = ()
        self._backward = None
        self.tid = next(_ids)
        self.name = name

    @property
    def shape(self):
        return self.data.shape

    def accumulate(self, g):
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, name={self.name})"


def _make(data, parents, backward, op):
    out = Tensor(_finite(np.asarray(data, dtype=np.float64), op))
    out.parents = tuple(parents)
    out._backward = backward
    return out


def constant(data, name=None):
    return Tensor(data, requires_grad=False, name=name)


def parameter(data, name=None):
    return Tensor(data, requires_grad=True, name=name)


# ---------------------------------------------------------------------------
# primitives


def add(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"add: shapes {a.data.shape} vs {b.data.shape}")

    def bwd(g):
        a.accumulate(g)
        b.accumulate(g)

    return _make(a.data + b.data, (a, b), bwd, "add")


def mul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.shape != b.data.shape:
        raise ShapeError(f"mul: shapes {a.data.shape} vs {b.data.shape}")

    def bwd(g):
        a.accumulate(g * b.data)
        b.accumulate(g * a.data)

    return _make(a.data * b.data, (a, b), bwd, "mul")


def scale(a: Tensor, s: float) -> Tensor:
    def bwd(g):
        a.accumulate(g * s)

    return _make(a.data * s, (a,), bwd, "scale")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product; the left operand may be a 1-D vector."""
    if b.data.ndim != 2:
        raise ShapeError(f"matmul: right operand must be 2-D, got {b.data.shape}")
    vec = a.data.ndim == 1
    am = a.data[None, :] if vec else a.data
    if am.ndim != 2 or am.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul: shapes {a.data.shape} vs {b.data.shape}")
    out = am @ b.data

    def bwd(g):
        gm = g[None, :] if vec else g
        ga = gm @ b.data.T
        a.accumulate(ga[0] if vec else ga)
        b.accumulate(am.T @ gm)

    return _make(out[0] if vec else out, (a, b), bwd, "matmul")


def concat(parts: list[Tensor]) -> Tensor:
    for p in parts:
        if p.data.ndim != 1:
            raise ShapeError(f"concat: expected 1-D parts, got {p.data.shape}")
    sizes = [p.data.shape[0] for p in parts]
    offs = np.cumsum([0] + sizes)

    def bwd(g):
        for p, lo, hi in zip(parts, offs[:-1], offs[1:]):
            p.accumulate(g[lo:hi])

    return _make(np.concatenate([p.data for p in parts]), parts, bwd, "concat")


def narrow(a: Tensor, lo: int, hi: int) -> Tensor:
    """Slice [lo, hi) of a 1-D tensor."""
    if a.data.ndim != 1:
        raise ShapeError(f"narrow: expected 1-D, got {a.data.shape}")

    def bwd(g):
        full = np.zeros_like(a.data)
        full[lo:hi] = g
        a.accumulate(full)

    return _make(a.data[lo:hi], (a,), bwd, "narrow")


ACTIVATIONS = ("relu", "tanh", "sigmoid")


def activation(kind: str, x: Tensor) -> Tensor:
    if kind == "relu":
        out = np.maximum(x.data, 0.0)
        # relu' at exactly 0 is taken as 0 (subgradient convention)
        local = (x.data > 0).astype(np.float64)
    elif kind == "tanh":
        out = np.tanh(x.data)
        local = 1.0 - out * out
    elif kind == "sigmoid":
        out = 1.0 / (1.0 + np.exp(-x.data))
        local = out * (1.0 - out)
    else:
        raise ConfigError(f"unknown activation {kind!r}")

    def bwd(g):
        x.accumulate(g * local)

    return _make(out, (x,), bwd, kind)


def conv1d(seq: Tensor, filters: Tensor, bias: Tensor) -> Tensor:
    """Valid 1-D convolution over a [T, d] sequence.

    filters is [w, d, F], bias [F]; the sequence is zero-padded on the
    right to length w when shorter. Returns window scores [P, F].
    """
    w, d, nf = filters.data.shape
    t = seq.data.shape[0]
    if seq.data.ndim != 2 or seq.data.shape[1] != d:
        raise ShapeError(f"conv1d: seq {seq.data.shape} vs filters {filters.data.shape}")
    if bias.data.shape != (nf,):
        raise ShapeError(f"conv1d: bias {bias.data.shape}, expected ({nf},)")
    padded = seq.data
    if t < w:
        padded = np.vstack([padded, np.zeros((w - t, d))])
    p = padded.shape[0] - w + 1
    # windows: [P, w*d]; filters flat: [w*d, F]
    win = np.stack([padded[i : i + w].ravel() for i in range(p)])
    flt = filters.data.reshape(w * d, nf)
    out = win @ flt + bias.data

    def bwd(g):
        bias.accumulate(g.sum(axis=0))
        filters.accumulate((win.T @ g).reshape(w, d, nf))
        gwin = g @ flt.T  # [P, w*d]
        gpad = np.zeros_like(padded)
        for i in range(p):
            gpad[i : i + w] += gwin[i].reshape(w, d)
        seq.accumulate(gpad[:t])

    return _make(out, (seq, filters, bias), bwd, "conv1d")


def max_over_rows(x: Tensor) -> Tensor:
    """Column-wise max of a [P, F] tensor; gradient routes to the first argmax."""
    if x.data.ndim != 2:
        raise ShapeError(f"max_over_rows: expected 2-D, got {x.data.shape}")
    arg = np.argmax(x.data, axis=0)  # first argmax on ties

    def bwd(g):
        full = np.zeros_like(x.data)
        full[arg, np.arange(x.data.shape[1])] = g
        x.accumulate(full)

    return _make(x.data[arg, np.arange(x.data.shape[1])], (x,), bwd, "max_over_rows")


def conv1d_maxpool(seq, filters, bias, act="relu"):
    """Kim-style window convolution with max-over-time pooling."""
    return max_over_rows(activation(act, conv1d(seq, filters, bias)))


class LSTMWeights:
    """Stacked gate weights, gate order (input, forget, candidate, output)."""

    def __init__(self, wx: Tensor, wh: Tensor, b: Tensor):
        dh4 = wx.data.shape[1]
        if dh4 % 4 or wh.data.shape != (dh4 // 4, dh4) or b.data.shape != (dh4,):
            raise ShapeError(
                f"lstm weights inconsistent: wx {wx.data.shape}, wh {wh.data.shape}, b {b.data.shape}"
            )
        self.wx, self.wh, self.b = wx, wh, b
        self.hidden = dh4 // 4

    def tensors(self):
        return [self.wx, self.wh, self.b]


def lstm_weights(input_dim: int, hidden: int, rng: np.random.Generator, prefix: str) -> LSTMWeights:
    s = 1.0 / np.sqrt(hidden)
    return LSTMWeights(
        parameter(rng.uniform(-s, s, (input_dim, 4 * hidden)), f"{prefix}.wx"),
        parameter(rng.uniform(-s, s, (hidden, 4 * hidden)), f"{prefix}.wh"),
        parameter(np.zeros(4 * hidden), f"{prefix}.b"),
    )


def lstm_step(x: Tensor, h: Tensor, c: Tensor, w: LSTMWeights) -> tuple[Tensor, Tensor]:
    """One LSTM cell update; returns (h', c')."""
    dh = w.hidden
    if h.data.shape != (dh,) or c.data.shape != (dh,):
        raise ShapeError(f"lstm_step: state shapes {h.data.shape}/{c.data.shape}, expected ({dh},)")
    z = add(add(matmul(x, w.wx), matmul(h, w.wh)), w.b)
    i = activation("sigmoid", narrow(z, 0, dh))
    f = activation("sigmoid", narrow(z, dh, 2 * dh))
    g = activation("tanh", narrow(z, 2 * dh, 3 * dh))
    o = activation("sigmoid", narrow(z, 3 * dh, 4 * dh))
    c_new = add(mul(f, c), mul(i, g))
    h_new = mul(o, activation("tanh", c_new))
    return h_new, c_new


def dropout(x: Tensor, keep_prob: float, mode: str, rng: np.random.Generator) -> Tensor:
    if keep_prob <= 0 or keep_prob > 1:
        raise ConfigError(f"keep_prob must be in (0, 1], got {keep_prob}")
    if mode == "eval" or keep_prob == 1.0:
        return x
    if mode != "train":
        raise ConfigError(f"dropout mode must be train or eval, got {mode!r}")
    mask = (rng.random(x.data.shape) < keep_prob) / keep_prob

    def bwd(g):
        x.accumulate(g * mask)

    return _make(x.data * mask, (x,), bwd, "dropout")


def softmax_probs(logits: np.ndarray, mask: np.ndarray | None = None) -> np.ndarray:
    """Numerically stable softmax; masked-out entries get probability 0."""
    z = np.asarray(logits, dtype=np.float64).copy()
    if mask is not None:
        if not mask.any():
            raise ConfigError("action mask permits no action")
        z[~mask] = -np.inf
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def softmax_xent(logits: Tensor, gold: int, mask: np.ndarray | None = None) -> Tensor:
    """Cross-entropy of a softmax over 1-D logits against a gold index.

    Returns a scalar tensor carrying the probability vector as `.probs`.
    """
    k = logits.data.shape[0]
    if not (0 <= gold < k):
        raise IndexError(f"gold action {gold} out of range [0, {k})")
    probs = softmax_probs(logits.data, mask)
    if probs[gold] <= 0:
        raise ConfigError("gold action is masked out")
    loss = -np.log(probs[gold])

    def bwd(g):
        grad = probs.copy()
        grad[gold] -= 1.0
        logits.accumulate(g * grad)

    out = _make(loss, (logits,), bwd, "softmax_xent")
    out.probs = probs  # type: ignore[attr-defined]
    return out


def mean_of(losses: list[Tensor]) -> Tensor:
    n = len(losses)

    def bwd(g):
        for l in losses:
            l.accumulate(g / n)

    return _make(np.mean([l.data for l in losses]), losses, bwd, "mean_of")


def tsum(x: Tensor) -> Tensor:
    def bwd(g):
        x.accumulate(np.full_like(x.data, g))

    return _make(x.data.sum(), (x,), bwd, "tsum")


def backward(loss: Tensor, params: list[Tensor] | None = None) -> None:
    """Reverse-accumulate gradients from a scalar loss.

    Visits each reachable node exactly once in reverse creation order.
    Parameters in `params` that the loss does not reach get zero grads.
    """
    if loss.data.size != 1:
        raise ShapeError(f"backward: loss must be scalar, got shape {loss.data.shape}")
    seen = {}
    stack = [loss]
    while stack:
        node = stack.pop()
        if node.tid in seen:
            continue
        seen[node.tid] = node
        stack.extend(node.parents)
    loss.grad = np.ones_like(loss.data)
    for node in sorted(seen.values(), key=lambda n: n.tid, reverse=True):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)
            _finite(node.grad, "backward")
    if params:
        for p in params:
            if p.grad is None:
                p.grad = np.zeros_like(p.data)


def zero_grads(tensors: list[Tensor]) -> None:
    for t in tensors:
        t.grad = None


class Adam:
    """Adam with bias correction over a fixed parameter list."""

    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        if lr <= 0 or eps <= 0 or not (0 <= beta1 < 1) or not (0 <= beta2 < 1):
            raise ConfigError("bad Adam hyperparameters")
        self.params = list(params)
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def step(self, clip_norm: float | None = None) -> None:
        grads = [p.grad if p.grad is not None else np.zeros_like(p.data) for p in self.params]
        if clip_norm is not None:
            total = np.sqrt(sum(float((g * g).sum()) for g in grads))
            if total > clip_norm:
                grads = [g * (clip_norm / total) for g in grads]
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.beta1
            m += (1 - self.beta1) * g
            v *= self.beta2
            v += (1 - self.beta2) * g * g
            p.data -= self.lr * (m / b1c) / (np.sqrt(v / b2c) + self.eps)
            _finite(p.data, "adam_step")


def numerical_gradient(f, x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite differences of a scalar function of an array."""
    g = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + h
        fp = f()
        x[idx] = orig - h
        fm = f()
        x[idx] = orig
        g[idx] = (fp - fm) / (2 * h)
        it.iternext()
    return g
