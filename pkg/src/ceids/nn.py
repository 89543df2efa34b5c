"""Dense feedforward networks trained by mini-batch backpropagation.

Inputs are row vectors: a batch is an ``(n, fan_in)`` array and each layer
computes ``a = f(a_prev @ W.T + b)`` with ``W`` of shape ``(fan_out, fan_in)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ArityMismatchError, BadConfigError, BadTopologyError, EmptyDatasetError

ACTIVATIONS = ("sigmoid", "relu", "tanh", "identity")
LOSSES = ("mse", "cross_entropy")
CE_EPS = 1e-12


def _sigmoid(z):
    # tanh form avoids overflow in exp for large |z|
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def activate(kind: str, z: np.ndarray) -> np.ndarray:
    if kind == "sigmoid":
        return _sigmoid(z)
    if kind == "relu":
        return np.maximum(z, 0.0)
    if kind == "tanh":
        return np.tanh(z)
    if kind == "identity":
        return z
    raise BadTopologyError(f"unknown activation {kind!r}")


def activation_derivative(kind: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if kind == "sigmoid":
        return a * (1.0 - a)
    if kind == "relu":
        return (z > 0).astype(z.dtype)
    if kind == "tanh":
        return 1.0 - a * a
    if kind == "identity":
        return np.ones_like(z)
    raise BadTopologyError(f"unknown activation {kind!r}")


@dataclass
class NetworkParams:
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    activations: tuple[str, ...]

    def __post_init__(self):
        if not (len(self.weights) == len(self.biases) == len(self.activations)):
            raise BadTopologyError("weights, biases and activations differ in count")
        for l, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise BadTopologyError(f"layer {l}: bias shape {b.shape} vs weight {w.shape}")
            if l > 0 and w.shape[1] != self.weights[l - 1].shape[0]:
                raise BadTopologyError(f"layer {l} expects {w.shape[1]} inputs")
        for kind in self.activations:
            if kind not in ACTIVATIONS:
                raise BadTopologyError(f"unknown activation {kind!r}")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[1]

    @property
    def n_outputs(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "NetworkParams":
        return NetworkParams(
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            tuple(self.activations),
        )

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for wb in zip(self.weights, self.biases) for p in wb])


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for wb in zip(self.weights, self.biases) for p in wb])


@dataclass
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 30
    batch_size: int = 64
    loss: str = "mse"
    seed: int = 0

    def validate(self):
        if not self.learning_rate > 0:
            raise BadConfigError("learning_rate must be positive")
        if self.epochs < 0:
            raise BadConfigError("epochs must be non-negative")
        if self.batch_size < 1:
            raise BadConfigError("batch_size must be at least 1")
        if self.loss not in LOSSES:
            raise BadConfigError(f"loss must be one of {LOSSES}")


@dataclass
class TrainResult:
    net: NetworkParams
    history: list[float] = field(default_factory=list)


def init_network(layer_sizes: Sequence[int], activations, seed: int) -> NetworkParams:
    """Uniform fan-based weights in ``±sqrt(6 / (fan_in + fan_out))``, zero biases.

    ``activations`` is either one name applied to every layer or one name per
    non-input layer.
    """
    sizes = list(layer_sizes)
    if len(sizes) < 2 or any(int(s) != s or s < 1 for s in sizes):
        raise BadTopologyError(f"need >= 2 positive layer sizes, got {sizes}")
    n_layers = len(sizes) - 1
    if isinstance(activations, str):
        activations = (activations,) * n_layers
    activations = tuple(activations)
    if len(activations) != n_layers:
        raise BadTopologyError(f"{n_layers} layers but {len(activations)} activations")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(weights, biases, activations)


def _as_batch(net: NetworkParams, p) -> tuple[np.ndarray, bool]:
    x = np.asarray(p, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != net.n_inputs:
        raise ArityMismatchError(f"input has {x.shape[-1]} features, network expects {net.n_inputs}")
    return x, single


def _forward_cache(net: NetworkParams, x: np.ndarray):
    zs, acts = [], [x]
    a = x
    for w, b, kind in zip(net.weights, net.biases, net.activations):
        z = a @ w.T + b
        a = activate(kind, z)
        zs.append(z)
        acts.append(a)
    return zs, acts


def forward(net: NetworkParams, p) -> list[np.ndarray]:
    """Per-layer activations ``[a1, ..., aL]``; the last entry is the output."""
    x, single = _as_batch(net, p)
    _, acts = _forward_cache(net, x)
    if single:
        return [a[0] for a in acts[1:]]
    return acts[1:]


def predict_proba(net: NetworkParams, p) -> np.ndarray:
    """Raw output-layer activations (one score per output neuron)."""
    x, single = _as_batch(net, p)
    a = x
    for w, b, kind in zip(net.weights, net.biases, net.activations):
        a = activate(kind, a @ w.T + b)
    return a[0] if single else a


def loss(pred, target, kind: str = "mse") -> float:
    """Per-sample loss summed over outputs; averaged over rows for a batch.

    ``mse`` is the squared error sum(t - a)^2; ``cross_entropy`` is
    -sum(t * log(a)) with ``a`` clamped to ``[1e-12, 1 - 1e-12]``.
    """
    a = np.asarray(pred, dtype=float)
    t = np.asarray(target, dtype=float)
    if a.shape != t.shape:
        raise ArityMismatchError(f"prediction shape {a.shape} vs target {t.shape}")
    if kind == "mse":
        per = np.sum((t - a) ** 2, axis=-1)
    elif kind == "cross_entropy":
        per = -np.sum(t * np.log(np.clip(a, CE_EPS, 1.0 - CE_EPS)), axis=-1)
    else:
        raise BadConfigError(f"unknown loss {kind!r}")
    return float(np.mean(per))


def _output_error(a: np.ndarray, t: np.ndarray, kind: str) -> np.ndarray:
    """d(per-sample loss)/d(output activation)."""
    if kind == "mse":
        return 2.0 * (a - t)
    if kind == "cross_entropy":
        clipped = np.clip(a, CE_EPS, 1.0 - CE_EPS)
        inside = (a > CE_EPS) & (a < 1.0 - CE_EPS)
        return np.where(inside, -t / clipped, 0.0)
    raise BadConfigError(f"unknown loss {kind!r}")


def backward(net: NetworkParams, inputs, targets, kind: str = "mse") -> Gradients:
    """Gradient of the mean batch loss w.r.t. every weight and bias."""
    x, _ = _as_batch(net, inputs)
    t = np.asarray(targets, dtype=float)
    if t.ndim == 1:
        t = t[None, :]
    if x.shape[0] == 0:
        raise EmptyDatasetError("backward needs a non-empty batch")
    if t.shape != (x.shape[0], net.n_outputs):
        raise ArityMismatchError(f"targets shape {t.shape}, expected {(x.shape[0], net.n_outputs)}")
    return _backward(net, x, t, kind)[0]


def _backward(net: NetworkParams, x: np.ndarray, t: np.ndarray, kind: str):
    zs, acts = _forward_cache(net, x)
    n = x.shape[0]
    n_layers = len(net.weights)
    gw = [None] * n_layers
    gb = [None] * n_layers
    delta = _output_error(acts[-1], t, kind) / n
    for l in range(n_layers - 1, -1, -1):
        delta = delta * activation_derivative(net.activations[l], zs[l], acts[l + 1])
        gw[l] = delta.T @ acts[l]
        gb[l] = delta.sum(axis=0)
        if l > 0:
            delta = delta @ net.weights[l]
    return Gradients(gw, gb), loss(acts[-1], t, kind)


def sgd_step(net: NetworkParams, grads: Gradients, learning_rate: float) -> None:
    """In-place update ``param -= learning_rate * grad``."""
    for w, b, gw, gb in zip(net.weights, net.biases, grads.weights, grads.biases):
        w -= learning_rate * gw
        b -= learning_rate * gb


def train(net: NetworkParams, inputs, targets, cfg: TrainConfig) -> TrainResult:
    """Mini-batch SGD; returns a new network and the per-epoch mean loss.

    Rows are reshuffled every epoch from a generator seeded by ``cfg.seed``;
    the final partial batch is trained. The input network is not modified.
    """
    cfg.validate()
    x, _ = _as_batch(net, inputs)
    t = np.asarray(targets, dtype=float)
    if t.ndim == 1:
        t = t[:, None] if net.n_outputs == 1 else t[None, :]
    if x.shape[0] == 0:
        raise EmptyDatasetError("cannot train on an empty dataset")
    if t.shape != (x.shape[0], net.n_outputs):
        raise ArityMismatchError(f"targets shape {t.shape}, expected {(x.shape[0], net.n_outputs)}")
    out = net.copy()
    rng = np.random.default_rng(cfg.seed)
    n = x.shape[0]
    history = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, tb = x[idx], t[idx]
            grads, batch_loss = _backward(out, xb, tb, cfg.loss)
            # loss at the pre-update parameters, as in Keras-style epoch logs
            total += batch_loss * idx.size
            sgd_step(out, grads, cfg.learning_rate)
        history.append(total / n)
    return TrainResult(out, history)
