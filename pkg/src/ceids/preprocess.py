"""Nominal encoding, Min-Max scaling and minority-class oversampling."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .data import N_FEATURES, NOMINAL_POSITIONS, NUMERIC_POSITIONS, RawRecord
from .errors import ArityMismatchError, EmptyDatasetError, MissingClassError


@dataclass(frozen=True)
class NominalEncoder:
    """Per nominal feature, the categories in first-appearance order.

    The code of a category is its index; an unseen category gets
    ``len(categories)``, a reserved "unknown" bucket.
    """

    categories: tuple[tuple[str, ...], ...]
    _maps: tuple[dict, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        maps = tuple({c: i for i, c in enumerate(cats)} for cats in self.categories)
        object.__setattr__(self, "_maps", maps)

    def code(self, feature: int, value: str) -> int:
        m = self._maps[feature]
        return m.get(value, len(m))

    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.categories)


def fit_nominal_encoder(train: Sequence[RawRecord]) -> NominalEncoder:
    if len(train) == 0:
        raise EmptyDatasetError("cannot fit a nominal encoder on an empty dataset")
    seen: list[dict[str, None]] = [{} for _ in NOMINAL_POSITIONS]
    for r in train:
        for j, value in enumerate(r.nominal_features):
            seen[j].setdefault(value, None)
    return NominalEncoder(tuple(tuple(s) for s in seen))


def encode(record: RawRecord, enc: NominalEncoder) -> np.ndarray:
    """Return the 41-dim numeric vector with nominal slots replaced by codes."""
    v = np.empty(N_FEATURES)
    v[list(NUMERIC_POSITIONS)] = record.numeric_features
    for j, pos in enumerate(NOMINAL_POSITIONS):
        v[pos] = enc.code(j, record.nominal_features[j])
    return v


def encode_records(records: Sequence[RawRecord], enc: NominalEncoder) -> np.ndarray:
    out = np.empty((len(records), N_FEATURES))
    if len(records) == 0:
        return out
    out[:, list(NUMERIC_POSITIONS)] = np.array([r.numeric_features for r in records])
    for j, pos in enumerate(NOMINAL_POSITIONS):
        out[:, pos] = [enc.code(j, r.nominal_features[j]) for r in records]
    return out


@dataclass(frozen=True)
class MinMaxScaler:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        if self.mins.shape != self.maxs.shape:
            raise ArityMismatchError("mins and maxs differ in length")
        if np.any(self.mins > self.maxs):
            raise ValueError("every feature needs min <= max")

    @property
    def n_features(self) -> int:
        return self.mins.shape[0]


def fit_minmax(train) -> MinMaxScaler:
    x = np.asarray(train, dtype=float)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyDatasetError("cannot fit a scaler on an empty dataset")
    return MinMaxScaler(x.min(axis=0), x.max(axis=0))


def apply_minmax(v, s: MinMaxScaler) -> np.ndarray:
    """Scale to [0, 1] by training extrema; clamps, constant features map to 0.

    Works on a single vector or a 2-D batch of row vectors.
    """
    x = np.asarray(v, dtype=float)
    if x.shape[-1] != s.n_features:
        raise ArityMismatchError(
            f"vector has {x.shape[-1]} features, scaler expects {s.n_features}"
        )
    span = s.maxs - s.mins
    constant = span == 0
    safe = np.where(constant, 1.0, span)
    out = (x - s.mins) / safe
    out = np.where(constant, 0.0, out)
    return np.clip(out, 0.0, 1.0)


def oversample_indices(labels, seed: int, n_classes: int | None = None) -> np.ndarray:
    """Row indices that balance every class up to the majority count.

    The original rows come first, in order; each minority class is then
    topped up by uniform draws with replacement from its own rows. Classes
    are ``range(n_classes)`` when given, otherwise the observed labels.
    """
    y = np.asarray(labels)
    if y.shape[0] == 0:
        raise EmptyDatasetError("cannot oversample an empty dataset")
    classes = np.unique(y) if n_classes is None else np.arange(n_classes)
    members = {c: np.flatnonzero(y == c) for c in classes.tolist()}
    missing = [c for c, idx in members.items() if idx.size == 0]
    if missing:
        raise MissingClassError(f"no records for class(es) {missing}")
    target = max(idx.size for idx in members.values())
    rng = np.random.default_rng(seed)
    parts = [np.arange(y.shape[0])]
    for c in sorted(members):
        idx = members[c]
        deficit = target - idx.size
        if deficit > 0:
            parts.append(idx[rng.integers(0, idx.size, size=deficit)])
    return np.concatenate(parts)


def oversample(x, y, seed: int, n_classes: int | None = None):
    """Return ``(x, y)`` with every class repeated up to the majority count."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise ArityMismatchError("x and y differ in length")
    idx = oversample_indices(y, seed, n_classes)
    return x[idx], y[idx]
