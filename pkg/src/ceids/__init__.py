"""Cluster-then-specialize intrusion detection for NSL-KDD style flow records."""

from .container import load_model, save_model
from .data import ClassLabel, RawRecord, load_dataset
from .ensemble import EnsembleModel, predict, predict_batch, train_pipeline

__all__ = [
    "ClassLabel",
    "EnsembleModel",
    "RawRecord",
    "load_dataset",
    "load_model",
    "predict",
    "predict_batch",
    "save_model",
    "train_pipeline",
]
