"""Cluster-then-specialize ensemble: per-cluster DNN/SVM selection and fusion.

Training order: nominal encoding, Min-Max scaling, oversampling, autoencoder,
mean-shift, per-cluster model selection, aggregation, final network.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autoencoder as ae
from . import meanshift as ms
from . import nn, svm
from .config import DnnConfig, FinalConfig, PipelineConfig, derive_seed, dump_config
from .data import N_CLASSES, ClassLabel, RawRecord
from .errors import ArityMismatchError, EmptyDatasetError, StageError, TinyClusterError
from .evaluation import cross_validate
from .preprocess import (
    MinMaxScaler,
    NominalEncoder,
    apply_minmax,
    encode_records,
    fit_minmax,
    fit_nominal_encoder,
    oversample_indices,
)

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass
class SelectionRecord:
    dnn_accuracy: float
    svm_accuracy: float
    n_records: int
    fallback: bool = False  # True when selected by training accuracy (tiny cluster)
    empty: bool = False


@dataclass
class ClusterModel:
    kind: str  # "DNN" or "SVM"
    model: nn.NetworkParams | svm.SvmModel
    selection: SelectionRecord

    def scores(self, z) -> np.ndarray:
        if self.kind == "DNN":
            return nn.predict_proba(self.model, z)
        return svm.predict_scores(self.model, z)


@dataclass
class EnsembleModel:
    encoder: NominalEncoder
    scaler: MinMaxScaler
    autoencoder: ae.AutoencoderModel
    meanshift: ms.MeanShiftModel
    clusters: list[ClusterModel]
    final: nn.NetworkParams
    config: PipelineConfig
    final_history: list[float] = field(default_factory=list)
    format_version: int = FORMAT_VERSION

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)


def select_kind(dnn_accuracy: float, svm_accuracy: float) -> str:
    """DNN unless the SVM is strictly more accurate."""
    return "SVM" if svm_accuracy > dnn_accuracy else "DNN"


def one_hot(labels, n_classes: int = N_CLASSES) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    out = np.zeros((labels.shape[0], n_classes))
    out[np.arange(labels.shape[0]), labels] = 1.0
    return out


def partition(z, ms_model: ms.MeanShiftModel) -> list[np.ndarray]:
    """Row indices of each cluster, in cluster-index order (possibly empty)."""
    idx = ms.assign_batch(ms_model, z)
    return [np.flatnonzero(idx == i) for i in range(ms_model.n_clusters)]


def train_dnn(z, labels, cfg: DnnConfig, seed: int) -> nn.NetworkParams:
    z = np.asarray(z, dtype=float)
    n_layers = len(cfg.hidden) + 1
    acts = (cfg.hidden_activation,) * (n_layers - 1) + (cfg.output_activation,)
    net = nn.init_network([z.shape[1], *cfg.hidden, N_CLASSES], acts, seed)
    tcfg = nn.TrainConfig(cfg.learning_rate, cfg.epochs, cfg.batch_size, cfg.loss, seed)
    return nn.train(net, z, one_hot(labels), tcfg).net


def _dnn_trainer(cfg: DnnConfig, seed: int):
    def trainer(x, y, fold):
        net = train_dnn(x, y, cfg, derive_seed(seed, "dnn-fold", fold))
        return lambda v: np.argmax(nn.predict_proba(net, v), axis=1)
    return trainer


def _svm_trainer(cfg: svm.SvmConfig, seed: int):
    def trainer(x, y, fold):
        model = svm.train_ovr(x, y, cfg, derive_seed(seed, "svm-fold", fold))
        return lambda v: svm.predict(model, v)
    return trainer


def _check_cluster(labels, min_size: int, k: int):
    n = labels.shape[0]
    if n < max(min_size, k):
        raise TinyClusterError(f"cluster has {n} records (< {max(min_size, k)})")
    if np.unique(labels).size < 2:
        raise TinyClusterError("cluster holds a single class")


def train_cluster_pair(z, labels, dnn_cfg: DnnConfig, svm_cfg: svm.SvmConfig, seed: int,
                       k: int = 10, min_size: int = 10, strict: bool = False) -> ClusterModel:
    """Train a DNN and an OvR SVM on one cluster and keep the more accurate.

    Accuracy is mean k-fold validation accuracy. Clusters that are too small
    or single-class raise :class:`TinyClusterError` when ``strict``; otherwise
    both models are trained on all rows and compared by training accuracy,
    with ``selection.fallback`` set.
    """
    z = np.asarray(z, dtype=float)
    labels = np.asarray(labels, dtype=np.int64)
    if z.shape[0] == 0:
        if strict:
            raise TinyClusterError("cluster is empty")
        d = z.shape[1]
        uniform = svm.SvmModel([svm.SvmBinary(np.zeros(d), svm.DEGENERATE_BIAS, True) for _ in range(N_CLASSES)])
        return ClusterModel("SVM", uniform, SelectionRecord(0.0, 0.0, 0, fallback=True, empty=True))
    fallback = False
    try:
        _check_cluster(labels, min_size, k)
    except TinyClusterError:
        if strict:
            raise
        fallback = True

    dnn_seed = derive_seed(seed, "dnn")
    svm_seed = derive_seed(seed, "svm")
    if fallback:
        dnn_model = train_dnn(z, labels, dnn_cfg, dnn_seed)
        svm_model = svm.train_ovr(z, labels, svm_cfg, svm_seed)
        dnn_acc = float(np.mean(np.argmax(nn.predict_proba(dnn_model, z), axis=1) == labels))
        svm_acc = float(np.mean(svm.predict(svm_model, z) == labels))
    else:
        cv_seed = derive_seed(seed, "folds")
        dnn_acc = cross_validate(_dnn_trainer(dnn_cfg, seed), z, labels, k, cv_seed).mean
        svm_acc = cross_validate(_svm_trainer(svm_cfg, seed), z, labels, k, cv_seed).mean
        dnn_model = svm_model = None

    kind = select_kind(dnn_acc, svm_acc)
    record = SelectionRecord(dnn_acc, svm_acc, int(z.shape[0]), fallback=fallback)
    if kind == "DNN":
        model = dnn_model if dnn_model is not None else train_dnn(z, labels, dnn_cfg, dnn_seed)
    else:
        model = svm_model if svm_model is not None else svm.train_ovr(z, labels, svm_cfg, svm_seed)
    return ClusterModel(kind, model, record)


def aggregate(models: Sequence[ClusterModel], ms_model: ms.MeanShiftModel, z) -> np.ndarray:
    """Concatenate each cluster model's scores times its 0/1 membership.

    Row ``r`` block ``i`` (columns ``5i:5i+5``) is ``y_i(r) * U_i(r)``.
    """
    z = np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z[None, :]
    if len(models) != ms_model.n_clusters:
        raise ArityMismatchError(f"{len(models)} cluster models for {ms_model.n_clusters} clusters")
    u = ms.memberships(ms_model, z)
    blocks = [m.scores(z) * u[:, [i]] for i, m in enumerate(models)]
    return np.hstack(blocks)


def train_final(aug, labels, cfg: FinalConfig | None = None, seed: int = 0) -> nn.TrainResult:
    """Single-layer ``K*5 -> 5`` network on one-hot targets under squared error."""
    cfg = cfg or FinalConfig()
    aug = np.asarray(aug, dtype=float)
    if aug.ndim != 2 or aug.shape[1] % N_CLASSES:
        raise ArityMismatchError(f"augmented width {aug.shape[-1]} is not a multiple of {N_CLASSES}")
    net = nn.init_network([aug.shape[1], N_CLASSES], cfg.activation, seed)
    tcfg = nn.TrainConfig(cfg.learning_rate, cfg.epochs, cfg.batch_size, "mse", seed)
    return nn.train(net, aug, one_hot(labels), tcfg)


def _stage(name):
    def wrap(fn):
        def inner(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except Exception as exc:
                raise StageError(name, exc) from exc
        return inner
    return wrap


def preprocess_records(records: Sequence[RawRecord], encoder: NominalEncoder, scaler: MinMaxScaler) -> np.ndarray:
    return apply_minmax(encode_records(records, encoder), scaler)


def train_pipeline(records: Sequence[RawRecord], labels, config: PipelineConfig | None = None,
                   seed: int | None = None) -> EnsembleModel:
    config = config or PipelineConfig()
    seed = config.seed if seed is None else seed
    config.seed = seed
    y = np.asarray([int(c) for c in labels], dtype=np.int64)
    if len(records) == 0:
        raise StageError("input", EmptyDatasetError("no training records"))
    if len(records) != y.shape[0]:
        raise StageError("input", ArityMismatchError("records and labels differ in length"))
    log.info("resolved config:\n%s", dump_config(config))
    log.info("seed = %d, records = %d", seed, len(records))

    encoder = _stage("encode")(fit_nominal_encoder)(records)
    x = _stage("encode")(encode_records)(records, encoder)
    scaler = _stage("scale")(fit_minmax)(x)
    x = apply_minmax(x, scaler)

    if config.oversample:
        idx = _stage("oversample")(oversample_indices)(y, derive_seed(seed, "oversample"), N_CLASSES)
        x, y = x[idx], y[idx]
        log.info("oversampled to %d records", x.shape[0])

    ae_model = _stage("autoencoder")(ae.train_autoencoder)(x, config.autoencoder, derive_seed(seed, "autoencoder"))
    z = ae.encode(ae_model, x)
    log.info("autoencoder final loss %.6g", ae_model.history[-1] if ae_model.history else float("nan"))

    msc = config.meanshift
    h = msc.bandwidth
    if h is None:
        h = _stage("bandwidth")(ms.estimate_bandwidth)(
            z, derive_seed(seed, "bandwidth"), msc.bandwidth_fraction, msc.bandwidth_cap, msc.bandwidth_bins)
    ms_model = _stage("meanshift")(ms.fit)(
        z, h, msc.tol, msc.max_iter, msc.cutoff, msc.subsample, derive_seed(seed, "meanshift"))
    log.info("bandwidth = %.6g, K = %d, populations = %s", h, ms_model.n_clusters, ms_model.populations.tolist())

    clusters = []
    for i, rows in enumerate(partition(z, ms_model)):
        cm = _stage(f"cluster {i}")(train_cluster_pair)(
            z[rows], y[rows], config.dnn_for_cluster(i), config.svm, derive_seed(seed, "cluster", i),
            config.cv_folds, config.min_cluster_size)
        s = cm.selection
        log.info("cluster %d: n=%d selected %s (dnn %.4f, svm %.4f%s)", i, s.n_records, cm.kind,
                 s.dnn_accuracy, s.svm_accuracy, ", fallback" if s.fallback else "")
        clusters.append(cm)

    aug = _stage("aggregate")(aggregate)(clusters, ms_model, z)
    result = _stage("final")(train_final)(aug, y, config.final, derive_seed(seed, "final"))
    log.info("final network loss history: %s", ", ".join(f"{v:.5f}" for v in result.history))
    return EnsembleModel(encoder, scaler, ae_model, ms_model, clusters, result.net, config, result.history)


def codes(model: EnsembleModel, records: Sequence[RawRecord]) -> np.ndarray:
    """Encoded, scaled and autoencoded representation of raw records."""
    return ae.encode(model.autoencoder, preprocess_records(records, model.encoder, model.scaler))


def augmented(model: EnsembleModel, records: Sequence[RawRecord]) -> np.ndarray:
    return aggregate(model.clusters, model.meanshift, codes(model, records))


def predict_batch(model: EnsembleModel, records: Sequence[RawRecord]) -> tuple[np.ndarray, np.ndarray]:
    """Class indices and final ``(n, 5)`` scores for many records."""
    if len(records) == 0:
        return np.empty(0, dtype=np.int64), np.empty((0, N_CLASSES))
    scores = nn.predict_proba(model.final, augmented(model, records))
    return np.argmax(scores, axis=1), scores


def predict(model: EnsembleModel, record: RawRecord) -> tuple[ClassLabel, np.ndarray]:
    idx, scores = predict_batch(model, [record])
    return ClassLabel(int(idx[0])), scores[0]
