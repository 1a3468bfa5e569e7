import math
import struct

import numpy as np
import pytest

from semlink.core import (
    Codebook,
    FormatError,
    LabeledDataset,
    Rng,
    derive_seed,
    generate_synthetic,
    l2_distance,
    load_codebook,
    load_dataset,
    save_codebook,
    save_dataset,
)


def random_dataset(seed, n=20, p=5, n_class=3):
    g = np.random.default_rng(seed)
    return LabeledDataset(g.standard_normal((n, p)), g.integers(0, n_class, n), n_class)


class TestL2Distance:
    def test_identity(self):
        assert l2_distance([1, 2], [1, 2]) == 0.0

    def test_3_4_5(self):
        assert l2_distance([0, 0], [3, 4]) == 5.0

    def test_hand_computed_vs_summation_oracle(self):
        a, b = [1, 1, 1], [2, 3, 4]
        oracle = math.sqrt(math.fsum((x - y) ** 2 for x, y in zip(a, b)))
        assert oracle == pytest.approx(math.sqrt(14), abs=1e-12)
        assert l2_distance(a, b) == pytest.approx(oracle, abs=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            l2_distance([1, 2], [1, 2, 3])

    def test_axioms_on_random_triples(self):
        g = np.random.default_rng(7)
        for _ in range(300):
            p = int(g.integers(1, 16))
            a, b, c = g.standard_normal((3, p)) * 10
            dab, dba = l2_distance(a, b), l2_distance(b, a)
            assert dab >= 0.0
            assert dab == dba
            dac, dbc = l2_distance(a, c), l2_distance(b, c)
            slack = 1e-9 * max(dab, dbc, dac, 1.0)
            assert dac <= dab + dbc + slack


class TestDatasetType:
    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            LabeledDataset(np.zeros((0, 3)), np.zeros(0), 2)

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            LabeledDataset([[np.nan, 1.0]], [0], 1)

    def test_label_out_of_range(self):
        with pytest.raises(ValueError):
            LabeledDataset([[1.0, 2.0]], [3], 2)

    def test_rows_cast_to_float32_and_frozen(self):
        ds = random_dataset(0)
        assert ds.embeddings.dtype == np.float32
        with pytest.raises(ValueError):
            ds.embeddings[0, 0] = 1.0


class TestDatasetFile:
    def test_round_trip_bit_exact(self, tmp_path):
        for seed in range(5):
            ds = random_dataset(seed, n=int(7 + seed), p=int(2 + seed))
            path = tmp_path / f"ds{seed}.semb"
            save_dataset(ds, path)
            back = load_dataset(path)
            assert back.embeddings.tobytes() == ds.embeddings.tobytes()
            assert np.array_equal(back.labels, ds.labels)
            assert back.n_class == ds.n_class

    def test_single_value_file_size(self, tmp_path):
        # 4-byte magic + 16 header bytes + one float32 + one u16 label
        ds = LabeledDataset([[0.5]], [0], 1)
        path = tmp_path / "one.semb"
        save_dataset(ds, path)
        assert path.stat().st_size == 4 + 16 + 4 + 2

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.semb"
        path.write_bytes(b"XEMB" + bytes(16))
        with pytest.raises(FormatError, match="magic") as err:
            load_dataset(path)
        assert err.value.offset == 0

    def test_bad_version(self, tmp_path):
        path = tmp_path / "bad.semb"
        path.write_bytes(struct.pack("<4sBBHIII", b"SEMB", 2, 0, 0, 1, 1, 1) + bytes(6))
        with pytest.raises(FormatError, match="version"):
            load_dataset(path)

    def test_truncated_payload(self, tmp_path):
        # header says N=2 but only one row + labels present
        path = tmp_path / "trunc.semb"
        payload = struct.pack("<f", 1.0) + struct.pack("<HH", 0, 0)
        path.write_bytes(struct.pack("<4sBBHIII", b"SEMB", 1, 0, 0, 2, 1, 1) + payload)
        with pytest.raises(FormatError, match="truncated"):
            load_dataset(path)

    def test_trailing_bytes(self, tmp_path):
        ds = LabeledDataset([[0.5]], [0], 1)
        path = tmp_path / "extra.semb"
        save_dataset(ds, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(FormatError, match="trailing"):
            load_dataset(path)

    def test_label_beyond_n_class(self, tmp_path):
        path = tmp_path / "label.semb"
        payload = struct.pack("<f", 1.0) + struct.pack("<H", 5)
        path.write_bytes(struct.pack("<4sBBHIII", b"SEMB", 1, 0, 0, 1, 1, 2) + payload)
        with pytest.raises(FormatError, match="label") as err:
            load_dataset(path)
        assert err.value.offset == 4 + 16 + 4


class TestCodebookFile:
    def test_round_trip_with_ids(self, tmp_path):
        g = np.random.default_rng(3)
        cb = Codebook(g.standard_normal((6, 4)), np.arange(6))
        path = tmp_path / "cb.scbk"
        save_codebook(cb, path)
        back = load_codebook(path)
        assert back.entries.tobytes() == cb.entries.tobytes()
        assert np.array_equal(back.source_ids, cb.source_ids)

    def test_round_trip_without_ids(self, tmp_path):
        cb = Codebook(np.random.default_rng(1).standard_normal((3, 2)))
        path = tmp_path / "cb.scbk"
        save_codebook(cb, path)
        back = load_codebook(path)
        assert back.source_ids is None
        assert back.entries.tobytes() == cb.entries.tobytes()

    def test_bad_flag(self, tmp_path):
        path = tmp_path / "bad.scbk"
        path.write_bytes(struct.pack("<4sBBHII", b"SCBK", 1, 7, 0, 1, 1) + bytes(4))
        with pytest.raises(FormatError, match="has_source_ids"):
            load_codebook(path)


class TestRng:
    def test_same_seed_same_stream(self):
        a = Rng(42).gen.standard_normal(8)
        b = Rng(42).gen.standard_normal(8)
        assert np.array_equal(a, b)

    def test_substreams_differ_and_are_stable(self):
        a1 = Rng(42).substream("phase", 3).gen.standard_normal(4)
        a2 = Rng(42).substream("phase", 3).gen.standard_normal(4)
        b = Rng(42).substream("phase", 4).gen.standard_normal(4)
        assert np.array_equal(a1, a2)
        assert not np.array_equal(a1, b)

    def test_seed_range(self):
        with pytest.raises(ValueError):
            Rng(-1)

    def test_derive_seed_stable(self):
        assert derive_seed(1, "x", 2) == derive_seed(1, "x", 2)
        assert derive_seed(1, "x", 2) != derive_seed(1, "x", 3)


class TestSynthetic:
    def test_two_centers_at_least_half_apart(self):
        ds = generate_synthetic(2, 1, 8, 1e-9, seed=7)
        assert l2_distance(ds.embeddings[0], ds.embeddings[1]) >= 0.5

    def test_deterministic(self):
        a = generate_synthetic(3, 4, 8, 0.1, seed=11)
        b = generate_synthetic(3, 4, 8, 0.1, seed=11)
        assert a.embeddings.tobytes() == b.embeddings.tobytes()
        assert np.array_equal(a.labels, b.labels)

    def test_zero_spread_rejected(self):
        with pytest.raises(ValueError):
            generate_synthetic(2, 1, 8, 0.0, seed=1)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            generate_synthetic(1, 1, 8, 0.1, seed=1)
        with pytest.raises(ValueError):
            generate_synthetic(2, 0, 8, 0.1, seed=1)
        with pytest.raises(ValueError):
            generate_synthetic(2, 1, 1, 0.1, seed=1)

    def test_separability_sanity(self):
        # with small spread, nearest class centroid classifies perfectly
        ds = generate_synthetic(4, 50, 16, 0.02, seed=3)
        centroids = np.array([
            ds.embeddings[ds.labels == c].mean(axis=0) for c in range(4)
        ])
        diff = ds.embeddings[:, None, :].astype(np.float64) - centroids[None, :, :]
        pred = np.argmin(np.sum(diff * diff, axis=2), axis=1)
        assert np.array_equal(pred, ds.labels)
