import math

import numpy as np
import pytest

from semlink.core import Codebook, LabeledDataset, l2_distance
from semlink.quantizer import (
    assign_index,
    assign_indices,
    build_identity_codebook,
    clamp_received_index,
    index_bit_width,
    reconstruct,
    reconstruct_received,
    total_information_bits,
)


def brute_force_assign(cb, q):
    """Independent minimizer: linear scan with strict < and per-row l2_distance."""
    best_i, best_d = 0, l2_distance(q, cb.entries[0])
    for i in range(1, cb.m):
        d = l2_distance(q, cb.entries[i])
        if d < best_d:
            best_i, best_d = i, d
    return best_i, best_d


class TestIdentityCodebook:
    def test_rows_and_source_ids(self):
        ds = LabeledDataset([[1, 2], [3, 4], [5, 6]], [0, 1, 0], 2)
        cb = build_identity_codebook(ds)
        assert cb.m == 3
        assert np.array_equal(cb.entries, ds.embeddings)
        assert np.array_equal(cb.source_ids, [0, 1, 2])


class TestBitWidth:
    @pytest.mark.parametrize("m,width", [
        (10000, 14),  # 2000 messages x 14 bits = 28000
        (944, 10),    # 2000 x 10 = 20000
        (1000, 10),
        (63, 6),      # 2000 x 6 = 12000
        (1, 1),
        (2, 1),
        (3, 2),
        (1024, 10),
        (1025, 11),
    ])
    def test_values(self, m, width):
        assert index_bit_width(m) == width

    def test_table2_bit_accounting(self):
        assert total_information_bits(2000, 10000) == 28000
        assert total_information_bits(2000, 944) == 20000
        assert total_information_bits(2000, 1000) == 20000
        assert total_information_bits(2000, 63) == 12000

    def test_invalid(self):
        with pytest.raises(ValueError):
            index_bit_width(0)


class TestAssign:
    def test_exact_entry(self):
        g = np.random.default_rng(0)
        cb = Codebook(g.standard_normal((8, 3)))
        a = assign_index(cb, cb.entries[5])
        assert a.index == 5
        assert a.distortion == 0.0

    def test_three_candidates(self):
        cb = Codebook([[0, 0], [10, 0], [0, 10]])
        a = assign_index(cb, [1, 1])
        assert a.index == 0
        assert a.distortion == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_duplicate_tie_breaks_low(self):
        cb = Codebook([[9, 9], [8, 8], [1, 1], [7, 7], [1, 1]])
        a = assign_index(cb, [1.5, 1.5])
        assert a.index == 2

    def test_dimension_mismatch(self):
        cb = Codebook([[0, 0]])
        with pytest.raises(ValueError):
            assign_index(cb, [1, 2, 3])

    def test_oracle_equivalence(self):
        g = np.random.default_rng(11)
        for _ in range(30):
            m = int(g.integers(1, 65))
            p = int(g.integers(1, 9))
            entries = g.standard_normal((m, p))
            if m >= 4:  # plant duplicates to exercise tie-breaking
                entries[3] = entries[1]
            cb = Codebook(entries)
            for _ in range(10):
                q = g.standard_normal(p)
                a = assign_index(cb, q)
                oi, od = brute_force_assign(cb, q)
                assert a.index == oi
                assert a.distortion == od
                assert a.distortion == l2_distance(q, cb.entries[a.index])

    def test_batch_matches_single(self):
        g = np.random.default_rng(5)
        cb = Codebook(g.standard_normal((17, 4)))
        queries = g.standard_normal((40, 4))
        batch = assign_indices(cb, queries)
        singles = [assign_index(cb, q).index for q in queries]
        assert np.array_equal(batch, singles)

    def test_quantize_twice_stable(self):
        g = np.random.default_rng(2)
        cb = Codebook(g.standard_normal((20, 6)))
        for i in range(cb.m):
            assert assign_index(cb, reconstruct(cb, i)).index == i


class TestReconstruct:
    def test_first_entry(self):
        cb = Codebook([[1, 2], [3, 4]])
        assert np.array_equal(reconstruct(cb, 0), [1, 2])

    def test_out_of_range(self):
        cb = Codebook([[1, 2]])
        with pytest.raises(ValueError):
            reconstruct(cb, 1)

    def test_corrupted_in_range_index_is_served(self):
        g = np.random.default_rng(4)
        cb = Codebook(g.standard_normal((10, 2)))
        # receiver cannot tell 7 was not the sent 3; it must still reconstruct
        assert np.array_equal(reconstruct(cb, 7), cb.entries[7])

    def test_clamp_policy(self):
        cb = Codebook(np.random.default_rng(1).standard_normal((10, 2)))
        assert clamp_received_index(cb, 9) == 9
        assert clamp_received_index(cb, 15) == 9
        with pytest.raises(ValueError):
            clamp_received_index(cb, -1)
        got = reconstruct_received(cb, np.array([0, 9, 12]))
        assert np.array_equal(got[2], cb.entries[9])
