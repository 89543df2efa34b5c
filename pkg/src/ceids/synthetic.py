"""Synthetic NSL-KDD-shaped records with a known cluster/class structure.

Each of three blobs has its own protocol and a block of "high" numeric
features; within a blob every class lifts one indicator feature. The data
is separable by construction, which makes end-to-end accuracy checkable.
"""

from __future__ import annotations

import numpy as np

from .data import ATTACK_CLASSES, NUMERIC_POSITIONS, ClassLabel, RawRecord

PROTOCOLS = ("tcp", "udp", "icmp")
SERVICES = ("http", "domain_u", "ecr_i", "ftp_data", "smtp")
FLAGS = ("SF", "S0", "REJ")
# one representative attack name per class
CLASS_ATTACKS = {
    ClassLabel.NORMAL: "normal",
    ClassLabel.DOS: "neptune",
    ClassLabel.PROBE: "portsweep",
    ClassLabel.R2L: "guess_passwd",
    ClassLabel.U2R: "buffer_overflow",
}

N_NUMERIC = len(NUMERIC_POSITIONS)
_BLOCK = 8  # high features per blob
_INDICATOR_START = 3 * _BLOCK  # numeric slots 24..28 carry the class


def make_blobs(n_per_class: int = 100, n_blobs: int = 3, noise: float = 0.03,
               seed: int = 0) -> tuple[list[RawRecord], list[ClassLabel]]:
    """``n_blobs * 5 * n_per_class`` records in blob-major, class-minor order."""
    if not 1 <= n_blobs <= 3:
        raise ValueError("n_blobs must be 1, 2 or 3")
    assert all(ATTACK_CLASSES[name] == c for c, name in CLASS_ATTACKS.items())
    rng = np.random.default_rng(seed)
    records, labels = [], []
    for b in range(n_blobs):
        for c in ClassLabel:
            base = np.full((n_per_class, N_NUMERIC), 0.1)
            base[:, b * _BLOCK:(b + 1) * _BLOCK] = 0.9
            base[:, _INDICATOR_START + int(c)] = 0.9
            values = np.clip(base + noise * rng.standard_normal(base.shape), 0.0, 1.0)
            # a byte-count style column on a much larger scale
            values[:, -1] = np.round(values[:, -1] * 1000.0)
            for row in values:
                records.append(RawRecord(
                    numeric_features=tuple(float(v) for v in row),
                    nominal_features=(
                        PROTOCOLS[b],
                        SERVICES[int(rng.integers(len(SERVICES)))],
                        FLAGS[b],
                    ),
                    attack_name=CLASS_ATTACKS[c],
                    difficulty=int(rng.integers(0, 22)),
                ))
                labels.append(c)
    return records, labels


# training-set class shares of the public NSL-KDD release
NSLKDD_TRAIN_SHARES = {
    ClassLabel.NORMAL: 67_343,
    ClassLabel.DOS: 45_927,
    ClassLabel.PROBE: 11_656,
    ClassLabel.R2L: 995,
    ClassLabel.U2R: 52,
}


def make_imbalanced(n_records: int, noise: float = 0.1, seed: int = 0,
                    shares=None) -> tuple[list[RawRecord], list[ClassLabel]]:
    """Blob records with class frequencies following ``shares`` (NSL-KDD train by default).

    Every class is guaranteed at least one record so oversampling has something
    to copy. Used for timing runs at NSL-KDD-like scale and imbalance.
    """
    shares = shares or NSLKDD_TRAIN_SHARES
    classes = list(shares)
    p = np.array([shares[c] for c in classes], dtype=float)
    rng = np.random.default_rng(seed)
    drawn = rng.choice(len(classes), size=n_records, p=p / p.sum())
    drawn[:len(classes)] = np.arange(len(classes))
    blobs_of = rng.integers(0, 3, size=n_records)
    records, labels = [], []
    for k, b in zip(drawn, blobs_of):
        c = classes[int(k)]
        base = np.full(N_NUMERIC, 0.1)
        base[b * _BLOCK:(b + 1) * _BLOCK] = 0.9
        base[_INDICATOR_START + int(c)] = 0.9
        row = np.clip(base + noise * rng.standard_normal(N_NUMERIC), 0.0, 1.0)
        row[-1] = np.round(row[-1] * 1000.0)
        records.append(RawRecord(
            numeric_features=tuple(float(v) for v in row),
            nominal_features=(PROTOCOLS[b], SERVICES[int(rng.integers(len(SERVICES)))], FLAGS[b]),
            attack_name=CLASS_ATTACKS[c],
            difficulty=int(rng.integers(0, 22)),
        ))
        labels.append(c)
    return records, labels


def shuffled(records, labels, seed: int):
    order = np.random.default_rng(seed).permutation(len(records))
    return [records[i] for i in order], [labels[i] for i in order]
