"""Undercomplete autoencoder used as the 41 -> 25 feature compressor."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import nn
from .errors import ArityMismatchError, EmptyDatasetError

CODE_DIM = 25


@dataclass
class AutoencoderConfig:
    code_dim: int = CODE_DIM
    learning_rate: float = 0.05
    epochs: int = 20
    batch_size: int = 128
    activation: str = "sigmoid"

    def train_config(self, seed: int) -> nn.TrainConfig:
        return nn.TrainConfig(self.learning_rate, self.epochs, self.batch_size, "mse", seed)


@dataclass
class AutoencoderModel:
    encoder: nn.NetworkParams
    decoder: nn.NetworkParams
    history: list[float] = field(default_factory=list)

    @property
    def code_dim(self) -> int:
        return self.encoder.n_outputs

    @property
    def n_inputs(self) -> int:
        return self.encoder.n_inputs

    def full_network(self) -> nn.NetworkParams:
        return nn.NetworkParams(
            self.encoder.weights + self.decoder.weights,
            self.encoder.biases + self.decoder.biases,
            self.encoder.activations + self.decoder.activations,
        )


def _split(net: nn.NetworkParams) -> tuple[nn.NetworkParams, nn.NetworkParams]:
    return (
        nn.NetworkParams(net.weights[:1], net.biases[:1], net.activations[:1]),
        nn.NetworkParams(net.weights[1:], net.biases[1:], net.activations[1:]),
    )


def train_autoencoder(train, cfg: AutoencoderConfig | None = None, seed: int = 0) -> AutoencoderModel:
    """Fit an ``n -> code_dim -> n`` reconstruction network under squared error.

    Inputs are expected to be Min-Max scaled already.
    """
    cfg = cfg or AutoencoderConfig()
    x = np.asarray(train, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDatasetError("autoencoder needs a non-empty 2-D training matrix")
    n_features = x.shape[1]
    if cfg.code_dim >= n_features:
        raise ArityMismatchError(f"code_dim {cfg.code_dim} is not smaller than input {n_features}")
    net = nn.init_network([n_features, cfg.code_dim, n_features], cfg.activation, seed)
    result = nn.train(net, x, x, cfg.train_config(seed))
    encoder, decoder = _split(result.net)
    return AutoencoderModel(encoder, decoder, result.history)


def encode(model: AutoencoderModel, v) -> np.ndarray:
    return nn.predict_proba(model.encoder, v)


def reconstruct(model: AutoencoderModel, v) -> np.ndarray:
    return nn.predict_proba(model.decoder, encode(model, v))


def reconstruction_mse(model: AutoencoderModel, x) -> float:
    """Mean squared error per entry, averaged over rows and features."""
    x = np.asarray(x, dtype=float)
    return float(np.mean((reconstruct(model, x) - x) ** 2))
