"""Pipeline configuration: dataclass sections plus a flat ``key = value`` file format.

Keys are ``section.field`` (for example ``final.batch_size = 512``) or a bare
top-level field (``seed = 7``). ``cluster.<i>.profile`` picks the per-cluster
network profile. Lines starting with ``#`` are comments. Unknown keys and
out-of-range values are rejected.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

from .autoencoder import AutoencoderConfig
from .errors import ConfigParseError, RangeError, UnknownKeyError
from .nn import ACTIVATIONS, LOSSES
from .svm import SvmConfig

PROFILES = ("deep_sigmoid", "shallow_relu")


@dataclass
class DnnConfig:
    hidden: tuple[int, ...] = (25, 15, 15, 25, 15, 10)
    hidden_activation: str = "sigmoid"
    output_activation: str = "sigmoid"
    loss: str = "mse"
    learning_rate: float = 2.0
    epochs: int = 30
    batch_size: int = 64


def shallow_relu_defaults() -> DnnConfig:
    return DnnConfig(
        hidden=(25, 15),
        hidden_activation="relu",
        output_activation="sigmoid",
        loss="cross_entropy",
        learning_rate=0.05,
        epochs=40,
        batch_size=128,
    )


@dataclass
class MeanShiftConfig:
    bandwidth: float | None = None  # None = estimate from data
    subsample: int = 5000
    tol: float = 1e-4
    max_iter: int = 300
    cutoff: float = 3.0
    bandwidth_fraction: float = 1 / 3
    bandwidth_cap: int = 2000
    bandwidth_bins: int = 50


@dataclass
class FinalConfig:
    activation: str = "tanh"
    learning_rate: float = 1.0
    epochs: int = 30
    batch_size: int = 512


@dataclass
class PathsConfig:
    train: str | None = None
    test: str | None = None
    model: str | None = None


@dataclass
class PipelineConfig:
    seed: int = 0
    oversample: bool = True
    cv_folds: int = 10
    min_cluster_size: int = 10
    paths: PathsConfig = field(default_factory=PathsConfig)
    autoencoder: AutoencoderConfig = field(default_factory=AutoencoderConfig)
    meanshift: MeanShiftConfig = field(default_factory=MeanShiftConfig)
    dnn: DnnConfig = field(default_factory=DnnConfig)
    dnn_shallow: DnnConfig = field(default_factory=shallow_relu_defaults)
    svm: SvmConfig = field(default_factory=SvmConfig)
    final: FinalConfig = field(default_factory=FinalConfig)
    cluster_profiles: dict[int, str] = field(default_factory=dict)

    def dnn_for_cluster(self, index: int) -> DnnConfig:
        profile = self.cluster_profiles.get(index, "deep_sigmoid")
        return self.dnn_shallow if profile == "shallow_relu" else self.dnn


_SECTIONS = ("paths", "autoencoder", "meanshift", "dnn", "dnn_shallow", "svm", "final")

_positive = lambda v: v > 0  # noqa: E731
_non_negative = lambda v: v >= 0  # noqa: E731
_at_least_one = lambda v: v >= 1  # noqa: E731

# field name -> (predicate, description); applied in every section carrying that name
_RANGES = {
    "learning_rate": (_positive, "> 0"),
    "epochs": (_non_negative, ">= 0"),
    "batch_size": (_at_least_one, ">= 1"),
    "code_dim": (_at_least_one, ">= 1"),
    "cv_folds": (lambda v: v >= 2, ">= 2"),
    "min_cluster_size": (_at_least_one, ">= 1"),
    "subsample": (lambda v: v >= 2, ">= 2"),
    "tol": (_positive, "> 0"),
    "max_iter": (_at_least_one, ">= 1"),
    "cutoff": (_positive, "> 0"),
    "bandwidth": (lambda v: v is None or v > 0, "> 0 or auto"),
    "bandwidth_fraction": (lambda v: 0 < v <= 1, "in (0, 1]"),
    "bandwidth_cap": (lambda v: v >= 2, ">= 2"),
    "bandwidth_bins": (_at_least_one, ">= 1"),
    "C": (_positive, "> 0"),
    "hidden": (lambda v: all(h >= 1 for h in v), "all >= 1"),
    "hidden_activation": (lambda v: v in ACTIVATIONS, f"one of {ACTIVATIONS}"),
    "output_activation": (lambda v: v in ACTIVATIONS, f"one of {ACTIVATIONS}"),
    "activation": (lambda v: v in ACTIVATIONS, f"one of {ACTIVATIONS}"),
    "loss": (lambda v: v in LOSSES, f"one of {LOSSES}"),
}


def _coerce(raw: str, current, key: str):
    """Parse ``raw`` into the type of the field's current (default) value."""
    text = raw.strip()
    try:
        if isinstance(current, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if key.endswith("bandwidth"):
            return None if text.lower() == "auto" else float(text)
        if isinstance(current, int):
            return int(text)
        if isinstance(current, float):
            value = float(text)
            if not math.isfinite(value):
                raise ValueError(text)
            return value
        if isinstance(current, tuple):
            return tuple(int(p) for p in text.split(",") if p.strip()) if text else ()
        if key.startswith("paths."):
            return text or None
        return text
    except ValueError:
        raise ConfigParseError(f"{key}: cannot parse {raw.strip()!r}") from None


def _check_range(key: str, name: str, value):
    rule = _RANGES.get(name)
    if rule and not rule[0](value):
        raise RangeError(f"{key} = {value!r} is out of range ({rule[1]})")


def _set(cfg: PipelineConfig, key: str, raw: str):
    parts = key.split(".")
    if parts[0] == "cluster":
        if len(parts) != 3 or parts[2] != "profile" or not parts[1].isdigit():
            raise UnknownKeyError(f"unknown key {key!r}")
        profile = raw.strip()
        if profile not in PROFILES:
            raise RangeError(f"{key} = {profile!r} is not one of {PROFILES}")
        cfg.cluster_profiles[int(parts[1])] = profile
        return
    if len(parts) == 1:
        target = cfg
    elif len(parts) == 2 and parts[0] in _SECTIONS:
        target = getattr(cfg, parts[0])
    else:
        raise UnknownKeyError(f"unknown key {key!r}")
    name = parts[-1]
    names = {f.name for f in dataclasses.fields(target)}
    if name not in names or (target is cfg and name in _SECTIONS + ("cluster_profiles",)):
        raise UnknownKeyError(f"unknown key {key!r}")
    value = _coerce(raw, getattr(target, name), key)
    _check_range(key, name, value)
    setattr(target, name, value)


def apply_override(cfg: PipelineConfig, key: str, raw) -> None:
    """Set one ``key = raw`` entry on ``cfg`` with the file-format checks."""
    _set(cfg, key, str(raw))


def parse_config(text: str) -> PipelineConfig:
    cfg = PipelineConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigParseError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, raw = stripped.split("=", 1)
        _set(cfg, key.strip(), raw)
    return cfg


def load_config(path) -> PipelineConfig:
    if path is None:
        return PipelineConfig()
    return parse_config(Path(path).read_text(encoding="utf-8"))


def _format_value(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def dump_config(cfg: PipelineConfig) -> str:
    """Fully resolved config in the same format :func:`parse_config` reads."""
    lines = []
    for f in dataclasses.fields(cfg):
        if f.name in _SECTIONS or f.name == "cluster_profiles":
            continue
        lines.append(f"{f.name} = {_format_value(getattr(cfg, f.name))}")
    for section in _SECTIONS:
        sub = getattr(cfg, section)
        for f in dataclasses.fields(sub):
            value = getattr(sub, f.name)
            if section == "paths":
                if value is None:
                    continue
                lines.append(f"paths.{f.name} = {value}")
            else:
                lines.append(f"{section}.{f.name} = {_format_value(value)}")
    for index in sorted(cfg.cluster_profiles):
        lines.append(f"cluster.{index}.profile = {cfg.cluster_profiles[index]}")
    return "\n".join(lines) + "\n"


def derive_seed(master: int, *names) -> int:
    """Stable 63-bit seed from the master seed and a stage path."""
    text = "/".join([str(master)] + [str(n) for n in names])
    return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little") >> 1
