"""NSL-KDD record parsing and attack-name to class mapping."""

from __future__ import annotations

import enum
import math
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import FieldCountError, NumericParseError, UnknownAttackError

N_FEATURES = 41
# 0-based positions of protocol_type, service, flag
NOMINAL_POSITIONS = (1, 2, 3)
NUMERIC_POSITIONS = tuple(i for i in range(N_FEATURES) if i not in NOMINAL_POSITIONS)

COLUMNS = (
    "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes",
    "land", "wrong_fragment", "urgent", "hot", "num_failed_logins",
    "logged_in", "num_compromised", "root_shell", "su_attempted",
    "num_root", "num_file_creations", "num_shells", "num_access_files",
    "num_outbound_cmds", "is_host_login", "is_guest_login", "count",
    "srv_count", "serror_rate", "srv_serror_rate", "rerror_rate",
    "srv_rerror_rate", "same_srv_rate", "diff_srv_rate",
    "srv_diff_host_rate", "dst_host_count", "dst_host_srv_count",
    "dst_host_same_srv_rate", "dst_host_diff_srv_rate",
    "dst_host_same_src_port_rate", "dst_host_srv_diff_host_rate",
    "dst_host_serror_rate", "dst_host_srv_serror_rate",
    "dst_host_rerror_rate", "dst_host_srv_rerror_rate",
)


class ClassLabel(enum.IntEnum):
    NORMAL = 0
    DOS = 1
    PROBE = 2
    R2L = 3
    U2R = 4

    def one_hot(self) -> np.ndarray:
        v = np.zeros(len(ClassLabel))
        v[int(self)] = 1.0
        return v

    @property
    def display(self) -> str:
        return _DISPLAY[self]


_DISPLAY = {
    ClassLabel.NORMAL: "Normal",
    ClassLabel.DOS: "DoS",
    ClassLabel.PROBE: "Probe",
    ClassLabel.R2L: "R2L",
    ClassLabel.U2R: "U2R",
}

N_CLASSES = len(ClassLabel)

# Standard NSL-KDD grouping, covering every name in KDDTrain+ and KDDTest+.
ATTACK_CLASSES = {
    "normal": ClassLabel.NORMAL,
    # DoS
    "back": ClassLabel.DOS,
    "land": ClassLabel.DOS,
    "neptune": ClassLabel.DOS,
    "pod": ClassLabel.DOS,
    "smurf": ClassLabel.DOS,
    "teardrop": ClassLabel.DOS,
    "apache2": ClassLabel.DOS,
    "mailbomb": ClassLabel.DOS,
    "processtable": ClassLabel.DOS,
    "udpstorm": ClassLabel.DOS,
    # Probe
    "ipsweep": ClassLabel.PROBE,
    "nmap": ClassLabel.PROBE,
    "portsweep": ClassLabel.PROBE,
    "satan": ClassLabel.PROBE,
    "mscan": ClassLabel.PROBE,
    "saint": ClassLabel.PROBE,
    # R2L
    "ftp_write": ClassLabel.R2L,
    "guess_passwd": ClassLabel.R2L,
    "imap": ClassLabel.R2L,
    "multihop": ClassLabel.R2L,
    "phf": ClassLabel.R2L,
    "spy": ClassLabel.R2L,
    "warezclient": ClassLabel.R2L,
    "warezmaster": ClassLabel.R2L,
    "named": ClassLabel.R2L,
    "sendmail": ClassLabel.R2L,
    "snmpgetattack": ClassLabel.R2L,
    "snmpguess": ClassLabel.R2L,
    "worm": ClassLabel.R2L,
    "xlock": ClassLabel.R2L,
    "xsnoop": ClassLabel.R2L,
    # U2R
    "buffer_overflow": ClassLabel.U2R,
    "loadmodule": ClassLabel.U2R,
    "perl": ClassLabel.U2R,
    "rootkit": ClassLabel.U2R,
    "httptunnel": ClassLabel.U2R,
    "ps": ClassLabel.U2R,
    "sqlattack": ClassLabel.U2R,
    "xterm": ClassLabel.U2R,
}


@dataclass(frozen=True)
class RawRecord:
    """One flow record: 38 numeric + 3 nominal features, label and difficulty.

    ``numeric_features`` holds the numeric columns in file order with the
    nominal columns removed; ``nominal_features`` is (protocol_type, service,
    flag).
    """

    numeric_features: tuple[float, ...]
    nominal_features: tuple[str, str, str]
    attack_name: str
    difficulty: int | None = None

    def __post_init__(self):
        if len(self.numeric_features) != len(NUMERIC_POSITIONS):
            raise FieldCountError(
                f"expected {len(NUMERIC_POSITIONS)} numeric features, "
                f"got {len(self.numeric_features)}"
            )
        if len(self.nominal_features) != len(NOMINAL_POSITIONS):
            raise FieldCountError("expected 3 nominal features")
        if not all(math.isfinite(x) for x in self.numeric_features):
            raise NumericParseError("numeric features must be finite")

    @property
    def protocol_type(self) -> str:
        return self.nominal_features[0]

    @property
    def service(self) -> str:
        return self.nominal_features[1]

    @property
    def flag(self) -> str:
        return self.nominal_features[2]


def parse_line(line: str, line_number: int | None = None) -> RawRecord:
    fields = [f.strip() for f in line.strip().split(",")]
    if len(fields) not in (N_FEATURES + 1, N_FEATURES + 2):
        raise FieldCountError(
            f"expected 42 or 43 comma-separated fields, got {len(fields)}", line_number
        )
    numeric = []
    for pos in NUMERIC_POSITIONS:
        try:
            value = float(fields[pos])
        except ValueError:
            raise NumericParseError(
                f"field {pos} ({COLUMNS[pos]}) is not numeric: {fields[pos]!r}", line_number
            ) from None
        if not math.isfinite(value):
            raise NumericParseError(
                f"field {pos} ({COLUMNS[pos]}) is not finite: {fields[pos]!r}", line_number
            )
        numeric.append(value)
    difficulty = None
    if len(fields) == N_FEATURES + 2:
        try:
            difficulty = int(fields[N_FEATURES + 1])
        except ValueError:
            raise NumericParseError(
                f"difficulty is not an integer: {fields[N_FEATURES + 1]!r}", line_number
            ) from None
    return RawRecord(
        numeric_features=tuple(numeric),
        nominal_features=tuple(fields[p] for p in NOMINAL_POSITIONS),
        attack_name=fields[N_FEATURES].lower(),
        difficulty=difficulty,
    )


def _format_number(x: float) -> str:
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def format_record(record: RawRecord) -> str:
    """Inverse of :func:`parse_line` (no trailing newline)."""
    out = [""] * N_FEATURES
    for pos, value in zip(NUMERIC_POSITIONS, record.numeric_features):
        out[pos] = _format_number(value)
    for pos, value in zip(NOMINAL_POSITIONS, record.nominal_features):
        out[pos] = value
    out.append(record.attack_name)
    if record.difficulty is not None:
        out.append(str(record.difficulty))
    return ",".join(out)


def map_attack_label(attack_name: str, line_number: int | None = None) -> ClassLabel:
    try:
        return ATTACK_CLASSES[attack_name]
    except KeyError:
        raise UnknownAttackError(f"unknown attack name {attack_name!r}", line_number) from None


def iter_dataset(path) -> Iterable[tuple[RawRecord, ClassLabel]]:
    with open(path, encoding="utf-8") as fh:
        for i, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            record = parse_line(line, i)
            yield record, map_attack_label(record.attack_name, i)


def load_dataset(path) -> list[tuple[RawRecord, ClassLabel]]:
    """Load an NSL-KDD text file, preserving line order.

    Raises ``FileNotFoundError`` (an ``OSError``) for a missing path, and the
    line-anchored parse errors of :func:`parse_line`/:func:`map_attack_label`.
    """
    path = Path(path)
    return list(iter_dataset(path))


def write_dataset(path, records: Iterable[RawRecord]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(format_record(r) + "\n")


def sample_records(pairs: list, n: int | None, seed: int) -> list:
    """Seeded subsample of ``n`` items without replacement, kept in file order."""
    if n is None or n >= len(pairs):
        return list(pairs)
    idx = np.sort(np.random.default_rng(seed).choice(len(pairs), size=n, replace=False))
    return [pairs[i] for i in idx]


def class_counts(labels: Iterable[ClassLabel]) -> dict[ClassLabel, int]:
    counts = Counter(labels)
    return {c: counts.get(c, 0) for c in ClassLabel}
