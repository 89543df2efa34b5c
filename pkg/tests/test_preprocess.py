from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ceids.data import RawRecord
from ceids.errors import ArityMismatchError, EmptyDatasetError, MissingClassError
from ceids.preprocess import (
    MinMaxScaler,
    apply_minmax,
    encode,
    encode_records,
    fit_minmax,
    fit_nominal_encoder,
    oversample,
    oversample_indices,
)

TABLE1_TRAIN = {0: 67_343, 1: 45_927, 2: 11_656, 3: 995, 4: 52}


def rec(protocol="tcp", service="http", flag="SF", fill=0.0):
    return RawRecord((fill,) * 38, (protocol, service, flag), "normal")


class TestNominalEncoder:
    def test_first_appearance(self):
        enc = fit_nominal_encoder([rec(p) for p in ("tcp", "udp", "tcp", "icmp")])
        assert [enc.code(0, p) for p in ("tcp", "udp", "icmp")] == [0, 1, 2]

    def test_single_record(self):
        assert fit_nominal_encoder([rec()]).sizes() == (1, 1, 1)

    def test_empty(self):
        with pytest.raises(EmptyDatasetError):
            fit_nominal_encoder([])

    def test_unseen_gets_reserved_code(self):
        enc = fit_nominal_encoder([rec(service=s) for s in ("http", "smtp", "ftp")])
        assert enc.code(1, "gopher") == 3

    def test_distinct_count_matches_independent_scan(self):
        rng = np.random.default_rng(0)
        services = [f"s{int(v)}" for v in rng.integers(0, 70, size=500)]
        enc = fit_nominal_encoder([rec(service=s) for s in services])
        assert enc.sizes()[1] == len(set(services))

    def test_codes_contiguous(self):
        enc = fit_nominal_encoder([rec(service=s) for s in "abcabd"])
        assert sorted(enc.code(1, s) for s in "abcd") == [0, 1, 2, 3]


class TestEncode:
    def test_slot_positions(self):
        enc = fit_nominal_encoder([rec("tcp", "http", "SF"), rec("udp", "dns", "REJ")])
        r = RawRecord(tuple(float(i + 10) for i in range(38)), ("udp", "http", "REJ"), "normal")
        v = encode(r, enc)
        assert v.shape == (41,)
        assert v[1] == 1.0 and v[2] == 0.0 and v[3] == 1.0
        assert v[0] == 10.0 and v[4] == 11.0 and v[40] == 47.0

    def test_tcp_code_zero(self):
        enc = fit_nominal_encoder([rec("tcp")])
        assert encode(rec("tcp"), enc)[1] == 0.0

    def test_batch_matches_single(self):
        rs = [rec("tcp", "a", fill=1.0), rec("udp", "b", fill=2.0), rec("icmp", "zz", fill=3.0)]
        enc = fit_nominal_encoder(rs[:2])
        batch = encode_records(rs, enc)
        for row, r in zip(batch, rs):
            np.testing.assert_array_equal(row, encode(r, enc))

    def test_deterministic(self):
        enc = fit_nominal_encoder([rec()])
        np.testing.assert_array_equal(encode(rec(fill=0.3), enc), encode(rec(fill=0.3), enc))


class TestMinMax:
    def test_extrema(self):
        s = fit_minmax(np.array([[0.0], [5.0], [10.0]]))
        assert s.mins[0] == 0 and s.maxs[0] == 10

    def test_constant(self):
        s = fit_minmax(np.array([[3.0], [3.0]]))
        assert s.mins[0] == 3 and s.maxs[0] == 3

    def test_brute_force_scan(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=(300, 41)) * rng.uniform(1, 1e4, size=41)
        s = fit_minmax(x)
        for j in range(41):
            lo = hi = x[0, j]
            for i in range(1, x.shape[0]):
                lo = x[i, j] if x[i, j] < lo else lo
                hi = x[i, j] if x[i, j] > hi else hi
            assert s.mins[j] == lo and s.maxs[j] == hi

    def test_empty(self):
        with pytest.raises(EmptyDatasetError):
            fit_minmax(np.empty((0, 3)))

    @pytest.mark.parametrize("x,expected", [(5.0, 0.5), (12.0, 1.0), (-4.0, 0.0), (0.0, 0.0), (10.0, 1.0)])
    def test_apply(self, x, expected):
        s = MinMaxScaler(np.array([0.0]), np.array([10.0]))
        assert apply_minmax([x], s)[0] == expected

    def test_degenerate_feature(self):
        s = MinMaxScaler(np.array([3.0]), np.array([3.0]))
        assert apply_minmax([3.0], s)[0] == 0.0
        assert apply_minmax([7.0], s)[0] == 0.0

    def test_arity(self):
        s = MinMaxScaler(np.zeros(3), np.ones(3))
        with pytest.raises(ArityMismatchError):
            apply_minmax(np.zeros(4), s)

    def test_idempotent_on_unit_columns(self):
        rng = np.random.default_rng(2)
        x = rng.uniform(size=(50, 6))
        x[0], x[1] = 0.0, 1.0
        s = fit_minmax(x)
        np.testing.assert_array_equal(apply_minmax(x, s), x)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 30), st.integers(1, 8)),
              elements=st.floats(-1e6, 1e6, allow_nan=False)))
def test_training_vectors_land_in_unit_interval(x):
    s = fit_minmax(x)
    y = apply_minmax(x, s)
    assert np.all((y >= 0) & (y <= 1))
    for j in range(x.shape[1]):
        if s.maxs[j] > s.mins[j]:
            assert y[np.argmin(x[:, j]), j] == 0.0
            assert y[np.argmax(x[:, j]), j] == 1.0


class TestOversample:
    def test_small_example(self):
        y = np.array(["A", "A", "A", "B"])
        _, out = oversample(np.arange(4), y, seed=0)
        assert Counter(out.tolist()) == {"A": 3, "B": 3}

    def test_balanced_is_identity(self):
        x = np.arange(10.0).reshape(5, 2)
        y = np.array([0, 1, 2, 3, 4])
        ox, oy = oversample(x, y, seed=3, n_classes=5)
        np.testing.assert_array_equal(ox, x)
        np.testing.assert_array_equal(oy, y)

    def test_table1_counts(self):
        y = np.concatenate([np.full(n, c) for c, n in TABLE1_TRAIN.items()])
        idx = oversample_indices(y, seed=0, n_classes=5)
        counts = np.bincount(y[idx], minlength=5)
        assert counts.tolist() == [67_343] * 5

    def test_missing_class(self):
        with pytest.raises(MissingClassError):
            oversample_indices(np.array([0, 0, 1]), seed=0, n_classes=5)

    def test_empty(self):
        with pytest.raises(EmptyDatasetError):
            oversample_indices(np.array([], dtype=int), seed=0)

    def test_seeded(self):
        y = np.array([0] * 10 + [1] * 2)
        np.testing.assert_array_equal(oversample_indices(y, 5), oversample_indices(y, 5))
        assert not np.array_equal(oversample_indices(y, 5), oversample_indices(y, 6))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 4), min_size=1, max_size=80), st.integers(0, 2**31))
def test_oversample_properties(labels, seed):
    y = np.array(labels)
    idx = oversample_indices(y, seed)
    out = y[idx]
    counts = Counter(out.tolist())
    assert len(set(counts.values())) == 1
    assert max(counts.values()) == max(Counter(labels).values())
    # originals kept once each up front; each class topped up by exactly its deficit
    np.testing.assert_array_equal(idx[:len(y)], np.arange(len(y)))
    original = Counter(labels)
    added = Counter(y[idx[len(y):]].tolist())
    target = max(original.values())
    assert all(added.get(c, 0) == target - n for c, n in original.items())
