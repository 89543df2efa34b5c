"""Versioned single-file container for fitted models.

Layout (all integers and reals little-endian)::

    b"CEIDS" | u32 format version | u64 payload length | 32-byte SHA-256 of payload | payload

The payload is a sequence of named components, each a length-prefixed blob,
in a fixed order. Reals are IEEE-754 float64 throughout, so a save/load
round trip is bit-exact.
"""

from __future__ import annotations

import hashlib
import io
import struct
from pathlib import Path

import numpy as np

from . import autoencoder as ae
from . import meanshift as ms
from . import nn, svm
from .config import PipelineConfig, dump_config, parse_config
from .ensemble import FORMAT_VERSION, ClusterModel, EnsembleModel, SelectionRecord
from .errors import ChecksumError, FormatVersionError, ModelFormatError
from .preprocess import MinMaxScaler, NominalEncoder

MAGIC = b"CEIDS"
SUPPORTED_VERSIONS = (FORMAT_VERSION,)
_HEADER = struct.Struct("<5sIQ32s")

ENSEMBLE_COMPONENTS = ("kind", "config", "nominal_encoder", "minmax_scaler", "autoencoder",
                       "meanshift", "clusters", "final_network")
PREPROCESSOR_COMPONENTS = ("kind", "nominal_encoder", "minmax_scaler")

_DTYPES = {0: np.dtype("<f8"), 1: np.dtype("<i8")}


class Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def u32(self, v: int):
        self.buf.write(struct.pack("<I", v))

    def i64(self, v: int):
        self.buf.write(struct.pack("<q", v))

    def f64(self, v: float):
        self.buf.write(struct.pack("<d", v))

    def flag(self, v: bool):
        self.buf.write(struct.pack("<B", 1 if v else 0))

    def text(self, s: str):
        raw = s.encode("utf-8")
        self.u32(len(raw))
        self.buf.write(raw)

    def array(self, a):
        a = np.asarray(a)
        code = 1 if np.issubdtype(a.dtype, np.integer) else 0
        data = np.ascontiguousarray(a, dtype=_DTYPES[code])
        self.buf.write(struct.pack("<BI", code, data.ndim))
        for dim in data.shape:
            self.buf.write(struct.pack("<Q", dim))
        self.buf.write(data.tobytes())

    def floats(self, values):
        self.array(np.asarray(values, dtype=float))

    def blob(self, name: str, data: bytes):
        self.text(name)
        self.buf.write(struct.pack("<Q", len(data)))
        self.buf.write(data)

    def getvalue(self) -> bytes:
        return self.buf.getvalue()


class Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFormatError("unexpected end of component data")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def _unpack(self, fmt: str):
        return struct.unpack(fmt, self._take(struct.calcsize(fmt)))

    def u32(self) -> int:
        return self._unpack("<I")[0]

    def i64(self) -> int:
        return self._unpack("<q")[0]

    def f64(self) -> float:
        return self._unpack("<d")[0]

    def flag(self) -> bool:
        return bool(self._unpack("<B")[0])

    def text(self) -> str:
        return self._take(self.u32()).decode("utf-8")

    def array(self) -> np.ndarray:
        code, ndim = self._unpack("<BI")
        if code not in _DTYPES:
            raise ModelFormatError(f"unknown array dtype code {code}")
        shape = tuple(self._unpack("<Q")[0] for _ in range(ndim))
        dtype = _DTYPES[code]
        count = int(np.prod(shape)) if shape else 1
        raw = self._take(count * dtype.itemsize)
        out = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        return out.astype(np.float64 if code == 0 else np.int64)

    def blob(self, expected: str) -> "Reader":
        name = self.text()
        if name != expected:
            raise ModelFormatError(f"expected component {expected!r}, found {name!r}")
        size = self._unpack("<Q")[0]
        return Reader(self._take(size))

    def done(self) -> bool:
        return self.pos == len(self.data)


def _write_network(w: Writer, net: nn.NetworkParams):
    w.u32(len(net.weights))
    for weight, bias, act in zip(net.weights, net.biases, net.activations):
        w.text(act)
        w.array(weight)
        w.array(bias)


def _read_network(r: Reader) -> nn.NetworkParams:
    n = r.u32()
    acts, weights, biases = [], [], []
    for _ in range(n):
        acts.append(r.text())
        weights.append(r.array())
        biases.append(r.array())
    return nn.NetworkParams(weights, biases, tuple(acts))


def _encoder_bytes(enc: NominalEncoder) -> bytes:
    w = Writer()
    w.u32(len(enc.categories))
    for cats in enc.categories:
        w.u32(len(cats))
        for c in cats:
            w.text(c)
    return w.getvalue()


def _read_encoder(r: Reader) -> NominalEncoder:
    cats = []
    for _ in range(r.u32()):
        cats.append(tuple(r.text() for _ in range(r.u32())))
    return NominalEncoder(tuple(cats))


def _scaler_bytes(s: MinMaxScaler) -> bytes:
    w = Writer()
    w.array(s.mins)
    w.array(s.maxs)
    return w.getvalue()


def _read_scaler(r: Reader) -> MinMaxScaler:
    return MinMaxScaler(r.array(), r.array())


def _autoencoder_bytes(m: ae.AutoencoderModel) -> bytes:
    w = Writer()
    _write_network(w, m.encoder)
    _write_network(w, m.decoder)
    w.floats(m.history)
    return w.getvalue()


def _read_autoencoder(r: Reader) -> ae.AutoencoderModel:
    enc = _read_network(r)
    dec = _read_network(r)
    return ae.AutoencoderModel(enc, dec, r.array().tolist())


def _meanshift_bytes(m: ms.MeanShiftModel) -> bytes:
    w = Writer()
    w.f64(m.bandwidth)
    w.f64(m.cutoff)
    w.i64(m.fit_subsample_size)
    w.array(m.modes)
    w.array(m.populations.astype(np.int64))
    return w.getvalue()


def _read_meanshift(r: Reader) -> ms.MeanShiftModel:
    h = r.f64()
    cutoff = r.f64()
    size = r.i64()
    modes = r.array()
    pops = r.array()
    return ms.MeanShiftModel(h, modes, pops, size, cutoff)


def _clusters_bytes(clusters) -> bytes:
    w = Writer()
    w.u32(len(clusters))
    for cm in clusters:
        s = cm.selection
        w.text(cm.kind)
        w.f64(s.dnn_accuracy)
        w.f64(s.svm_accuracy)
        w.i64(s.n_records)
        w.flag(s.fallback)
        w.flag(s.empty)
        if cm.kind == "DNN":
            _write_network(w, cm.model)
        else:
            w.u32(len(cm.model.machines))
            for mc in cm.model.machines:
                w.array(mc.theta)
                w.f64(mc.theta0)
                w.flag(mc.degenerate)
    return w.getvalue()


def _read_clusters(r: Reader) -> list[ClusterModel]:
    out = []
    for _ in range(r.u32()):
        kind = r.text()
        sel = SelectionRecord(r.f64(), r.f64(), r.i64(), r.flag(), r.flag())
        if kind == "DNN":
            model = _read_network(r)
        elif kind == "SVM":
            machines = [svm.SvmBinary(r.array(), r.f64(), r.flag()) for _ in range(r.u32())]
            model = svm.SvmModel(machines)
        else:
            raise ModelFormatError(f"unknown cluster model kind {kind!r}")
        out.append(ClusterModel(kind, model, sel))
    return out


def _pack(components: list[tuple[str, bytes]], version: int = FORMAT_VERSION) -> bytes:
    w = Writer()
    for name, data in components:
        w.blob(name, data)
    payload = w.getvalue()
    return _HEADER.pack(MAGIC, version, len(payload), hashlib.sha256(payload).digest()) + payload


def _unpack(data: bytes) -> Reader:
    if len(data) < _HEADER.size:
        if data[:len(MAGIC)] != MAGIC[:len(data)]:
            raise ModelFormatError("not a model container (bad magic)")
        raise ChecksumError("file is truncated inside the header")
    magic, version, length, digest = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ModelFormatError("not a model container (bad magic)")
    if version not in SUPPORTED_VERSIONS:
        raise FormatVersionError(f"format version {version} is not supported {SUPPORTED_VERSIONS}")
    payload = data[_HEADER.size:]
    if len(payload) != length or hashlib.sha256(payload).digest() != digest:
        raise ChecksumError("payload checksum mismatch (truncated or corrupted file)")
    return Reader(payload)


def _text_bytes(s: str) -> bytes:
    w = Writer()
    w.text(s)
    return w.getvalue()


def model_bytes(model: EnsembleModel) -> bytes:
    w = Writer()
    _write_network(w, model.final)
    w.floats(model.final_history)
    return _pack([
        ("kind", _text_bytes("ensemble")),
        ("config", _text_bytes(dump_config(model.config))),
        ("nominal_encoder", _encoder_bytes(model.encoder)),
        ("minmax_scaler", _scaler_bytes(model.scaler)),
        ("autoencoder", _autoencoder_bytes(model.autoencoder)),
        ("meanshift", _meanshift_bytes(model.meanshift)),
        ("clusters", _clusters_bytes(model.clusters)),
        ("final_network", w.getvalue()),
    ], model.format_version)


def save_model(model: EnsembleModel, path) -> None:
    Path(path).write_bytes(model_bytes(model))


def _read_kind(r: Reader) -> str:
    return r.blob("kind").text()


def load_model_bytes(data: bytes) -> EnsembleModel:
    r = _unpack(data)
    kind = _read_kind(r)
    if kind != "ensemble":
        raise ModelFormatError(f"container holds a {kind!r}, not an ensemble model")
    config: PipelineConfig = parse_config(r.blob("config").text())
    encoder = _read_encoder(r.blob("nominal_encoder"))
    scaler = _read_scaler(r.blob("minmax_scaler"))
    auto = _read_autoencoder(r.blob("autoencoder"))
    msm = _read_meanshift(r.blob("meanshift"))
    clusters = _read_clusters(r.blob("clusters"))
    fr = r.blob("final_network")
    final = _read_network(fr)
    history = fr.array().tolist()
    if not r.done():
        raise ModelFormatError("trailing data after the last component")
    return EnsembleModel(encoder, scaler, auto, msm, clusters, final, config, history)


def load_model(path) -> EnsembleModel:
    return load_model_bytes(Path(path).read_bytes())


def save_preprocessor(encoder: NominalEncoder, scaler: MinMaxScaler, path) -> None:
    Path(path).write_bytes(_pack([
        ("kind", _text_bytes("preprocessor")),
        ("nominal_encoder", _encoder_bytes(encoder)),
        ("minmax_scaler", _scaler_bytes(scaler)),
    ]))


def load_preprocessor(path) -> tuple[NominalEncoder, MinMaxScaler]:
    r = _unpack(Path(path).read_bytes())
    kind = _read_kind(r)
    if kind != "preprocessor":
        raise ModelFormatError(f"container holds a {kind!r}, not a preprocessor")
    return _read_encoder(r.blob("nominal_encoder")), _read_scaler(r.blob("minmax_scaler"))
