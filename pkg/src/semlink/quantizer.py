"""Memory-based semantic quantization: stored past embeddings serve directly as
the codebook, and each fresh embedding maps to its nearest codeword's index."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Codebook, LabeledDataset, l2_distance


@dataclass(frozen=True)
class Assignment:
    """Chosen codeword index plus the distortion at that codeword."""

    index: int
    distortion: float


def build_identity_codebook(ds: LabeledDataset) -> Codebook:
    """Use the stored embeddings themselves as codewords, in dataset order."""
    return Codebook(ds.embeddings, np.arange(ds.n))


def index_bit_width(m: int) -> int:
    """Fixed bit width needed to address m codewords: max(1, ceil(log2 m))."""
    if m < 1:
        raise ValueError("codebook size must be >= 1")
    if m == 1:
        return 1
    return int(m - 1).bit_length()


def _distances_to(cb: Codebook, q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 1 or q.shape[0] != cb.p:
        raise ValueError(f"query dimension {q.shape} does not match codebook p={cb.p}")
    diff = cb.entries.astype(np.float64) - q
    return np.sqrt(np.sum(diff * diff, axis=1))


def assign_index(cb: Codebook, q) -> Assignment:
    """Exhaustive nearest-codeword scan; ties break to the lowest index."""
    dist = _distances_to(cb, q)
    idx = int(np.argmin(dist))
    return Assignment(idx, float(dist[idx]))


def assign_indices(cb: Codebook, queries: np.ndarray) -> np.ndarray:
    """Vectorized assign_index over the rows of an (n, p) query matrix.

    Bit-identical to the per-query scan: distances use the same float64
    reduction, and argmin keeps the lowest index on ties.
    """
    queries = np.asarray(queries, dtype=np.float64)
    if queries.ndim != 2 or queries.shape[1] != cb.p:
        raise ValueError(f"query matrix shape {queries.shape} does not match codebook p={cb.p}")
    entries = cb.entries.astype(np.float64)
    out = np.empty(queries.shape[0], dtype=np.int64)
    # Chunked so the (chunk, M, p) difference tensor stays small.
    chunk = max(1, int(4e6 // max(1, cb.m * cb.p)))
    for start in range(0, queries.shape[0], chunk):
        block = queries[start : start + chunk]
        diff = block[:, None, :] - entries[None, :, :]
        d2 = np.sum(diff * diff, axis=2)
        out[start : start + block.shape[0]] = np.argmin(d2, axis=1)
    return out


def reconstruct(cb: Codebook, index: int) -> np.ndarray:
    """Map an index back to its codeword. Out-of-range indices are a caller bug."""
    if not 0 <= index < cb.m:
        raise ValueError(f"index {index} out of range for codebook of size {cb.m}")
    return cb.entries[index]


def clamp_received_index(cb: Codebook, index: int) -> int:
    """Receiver-side policy for channel-corrupted indices: when the bit width
    addresses more than M values, out-of-range indices clamp to M - 1."""
    if index < 0:
        raise ValueError("received index cannot be negative")
    return min(index, cb.m - 1)


def reconstruct_received(cb: Codebook, indices: np.ndarray) -> np.ndarray:
    """Vectorized receiver reconstruction with the clamping policy applied."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.size and idx.min() < 0:
        raise ValueError("received indices cannot be negative")
    return cb.entries[np.minimum(idx, cb.m - 1)]


def total_information_bits(n_messages: int, m: int) -> int:
    """Fixed-width bit accounting: n_messages * index_bit_width(m)."""
    if n_messages < 0:
        raise ValueError("n_messages must be >= 0")
    return n_messages * index_bit_width(m)
