"""Linear soft-margin SVM trained in the primal by hinge-loss subgradient steps.

The binary objective is ``0.5 * ||theta||^2 + C * sum(max(0, 1 - y (theta.x + theta0)))``.
Each epoch visits every sample once in a seeded random order; a sample step
uses the subgradient of ``||theta||^2 / (2n) + C * hinge_i`` so that one
epoch sweeps the whole objective. The step size in epoch ``k`` (1-based) is
``learning_rate / sqrt(k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .data import N_CLASSES
from .errors import ArityMismatchError, EmptyDatasetError, SingleClassError

DEGENERATE_BIAS = -1e6


@dataclass
class SvmConfig:
    C: float = 1.0
    epochs: int = 20
    learning_rate: float = 0.1


@dataclass
class SvmBinary:
    theta: np.ndarray
    theta0: float
    degenerate: bool = False

    @property
    def margin(self) -> float:
        """Width ``2 / ||theta||`` between the two supporting hyperplanes."""
        norm = float(np.linalg.norm(self.theta))
        return np.inf if norm == 0 else 2.0 / norm


@dataclass
class SvmModel:
    machines: list[SvmBinary] = field(default_factory=list)

    @property
    def n_features(self) -> int:
        return self.machines[0].theta.shape[0]

    @property
    def degenerate_classes(self) -> list[int]:
        return [c for c, m in enumerate(self.machines) if m.degenerate]


@numba.njit(cache=True)
def _sgd_hinge(x, y, orders, C, lr, theta, theta0):
    """In-place training of ``m`` machines sharing the visiting order.

    x: (n, d); y: (m, n) in {-1, +1}; orders: (epochs, n); theta: (m, d);
    theta0: (m,).
    """
    n, d = x.shape
    m = y.shape[0]
    inv_n = 1.0 / n
    for e in range(orders.shape[0]):
        eta = lr / np.sqrt(e + 1.0)
        for s in range(n):
            i = orders[e, s]
            for k in range(m):
                score = theta0[k]
                for j in range(d):
                    score += theta[k, j] * x[i, j]
                active = y[k, i] * score < 1.0
                for j in range(d):
                    g = theta[k, j] * inv_n
                    if active:
                        g -= C * y[k, i] * x[i, j]
                    theta[k, j] -= eta * g
                if active:
                    theta0[k] += eta * C * y[k, i]


def _orders(n: int, epochs: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    out = np.empty((epochs, n), dtype=np.int64)
    for e in range(epochs):
        out[e] = rng.permutation(n)
    return out


def hinge_objective(m: SvmBinary, x, y, C: float) -> float:
    x = np.asarray(x, dtype=float)
    margins = np.asarray(y, dtype=float) * (x @ m.theta + m.theta0)
    return float(0.5 * m.theta @ m.theta + C * np.maximum(0.0, 1.0 - margins).sum())


def train_binary(x, y, C: float = 1.0, epochs: int = 20, learning_rate: float = 0.1, seed: int = 0) -> SvmBinary:
    x = np.ascontiguousarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDatasetError("SVM needs a non-empty 2-D training matrix")
    if y.shape != (x.shape[0],):
        raise ArityMismatchError("labels and rows differ in length")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("binary labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SingleClassError("binary SVM needs both +1 and -1 samples")
    theta = np.zeros((1, x.shape[1]))
    theta0 = np.zeros(1)
    _sgd_hinge(x, y[None, :].copy(), _orders(x.shape[0], epochs, seed), C, learning_rate, theta, theta0)
    return SvmBinary(theta[0], float(theta0[0]))


def decision(m: SvmBinary, x) -> float | np.ndarray:
    """``theta.x + theta0``; its sign is the predicted binary label."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != m.theta.shape[0]:
        raise ArityMismatchError(f"input has {x.shape[-1]} features, machine expects {m.theta.shape[0]}")
    out = x @ m.theta + m.theta0
    return float(out) if x.ndim == 1 else out


def train_ovr(x, labels, cfg: SvmConfig | None = None, seed: int = 0, n_classes: int = N_CLASSES) -> SvmModel:
    """One machine per class, class ``c`` against the rest.

    A class with no samples gets a degenerate machine whose decision is a
    large negative constant. If only one class is present its machine is a
    degenerate constant +1.
    """
    cfg = cfg or SvmConfig()
    x = np.ascontiguousarray(x, dtype=float)
    labels = np.asarray(labels)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDatasetError("SVM needs a non-empty 2-D training matrix")
    if labels.shape != (x.shape[0],):
        raise ArityMismatchError("labels and rows differ in length")
    d = x.shape[1]
    present = [c for c in range(n_classes) if np.any(labels == c)]
    machines = [SvmBinary(np.zeros(d), DEGENERATE_BIAS, True) for _ in range(n_classes)]
    if len(present) == 1:
        machines[present[0]] = SvmBinary(np.zeros(d), 1.0, True)
        return SvmModel(machines)
    y = np.stack([np.where(labels == c, 1.0, -1.0) for c in present])
    theta = np.zeros((len(present), d))
    theta0 = np.zeros(len(present))
    _sgd_hinge(x, y, _orders(x.shape[0], cfg.epochs, seed), cfg.C, cfg.learning_rate, theta, theta0)
    for k, c in enumerate(present):
        machines[c] = SvmBinary(theta[k].copy(), float(theta0[k]))
    return SvmModel(machines)


def decisions(m: SvmModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != m.n_features:
        raise ArityMismatchError(f"input has {x.shape[-1]} features, model expects {m.n_features}")
    thetas = np.stack([mc.theta for mc in m.machines])
    biases = np.array([mc.theta0 for mc in m.machines])
    return x @ thetas.T + biases


def predict_scores(m: SvmModel, x) -> np.ndarray:
    """Softmax of the per-class decision values (rows sum to 1)."""
    z = decisions(m, x)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def predict(m: SvmModel, x) -> np.ndarray:
    return np.argmax(decisions(m, x), axis=-1)
