"""Shared domain types, deterministic randomness, distances, and binary file I/O.

Embeddings are plain 1-D numpy arrays; datasets and codebooks are thin frozen
wrappers around 2-D arrays. On-disk precision is float32 (SEMB / SCBK formats
below); distance and loss accumulations always run in float64.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DATASET_MAGIC = b"SEMB"
CODEBOOK_MAGIC = b"SCBK"

# Little-endian. After the 4-byte magic: version u8, dtype u8 (0 = float32),
# reserved u16, N u32, p u32, n_class u32 -> 16 bytes of header fields.
_DATASET_HEADER = struct.Struct("<4sBBHIII")
# After the magic: version u8, has_source_ids u8, reserved u16, M u32, p u32.
_CODEBOOK_HEADER = struct.Struct("<4sBBHII")

_MIN_CENTER_DISTANCE = 0.5
_CENTER_RETRY_BUDGET = 1000


class FormatError(ValueError):
    """A binary file violates its format; names the offending field and byte offset."""

    def __init__(self, field: str, offset: int, detail: str):
        self.field = field
        self.offset = offset
        super().__init__(f"{detail} (field {field!r} at byte offset {offset})")


def _stream_token(value) -> int:
    """Map a substream id (int or str) to a stable non-negative integer."""
    if isinstance(value, (int, np.integer)):
        if value < 0:
            raise ValueError("stream ids must be non-negative")
        return int(value)
    if isinstance(value, str):
        digest = hashlib.blake2s(value.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "little")
    raise ValueError(f"stream ids must be ints or strings, got {type(value).__name__}")


class Rng:
    """Deterministic PCG64 stream keyed by (seed, substream path).

    The same (seed, path) always yields the same draw sequence, and distinct
    paths yield independent streams, so phases seeded per (phase, index) are
    reproducible regardless of execution order.
    """

    def __init__(self, seed: int, _path: tuple = ()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self._path = tuple(_path)
        entropy = [seed, *self._path]
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def substream(self, *ids) -> "Rng":
        return Rng(self.seed, self._path + tuple(_stream_token(i) for i in ids))

    @property
    def gen(self) -> np.random.Generator:
        return self._gen


def derive_seed(seed: int, *ids) -> int:
    """Fold (seed, ids) into a fresh 63-bit integer seed for plain-int seed fields."""
    entropy = [_stream_token(seed), *(_stream_token(i) for i in ids)]
    state = np.random.SeedSequence(entropy).generate_state(1, np.uint64)[0]
    return int(state >> np.uint64(1))


@dataclass(frozen=True)
class LabeledDataset:
    """N embeddings with class labels in [0, n_class). Rows are float32, immutable."""

    embeddings: np.ndarray
    labels: np.ndarray
    n_class: int

    def __post_init__(self):
        emb = np.ascontiguousarray(self.embeddings, dtype=np.float32)
        labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        if emb.ndim != 2 or emb.shape[0] < 1 or emb.shape[1] < 1:
            raise ValueError("embeddings must be a non-empty N x p matrix")
        if not np.isfinite(emb).all():
            raise ValueError("embeddings must be finite")
        if labels.shape != (emb.shape[0],):
            raise ValueError("need exactly one label per embedding row")
        if int(self.n_class) < 1:
            raise ValueError("n_class must be >= 1")
        if labels.min() < 0 or labels.max() >= int(self.n_class):
            raise ValueError("labels must lie in [0, n_class)")
        emb.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "embeddings", emb)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_class", int(self.n_class))

    @property
    def n(self) -> int:
        return self.embeddings.shape[0]

    @property
    def p(self) -> int:
        return self.embeddings.shape[1]


@dataclass(frozen=True)
class Codebook:
    """M quantization targets of dimension p; source_ids point into the origin
    dataset for memory-based codebooks and are absent for learned ones."""

    entries: np.ndarray
    source_ids: np.ndarray | None = None

    def __post_init__(self):
        entries = np.ascontiguousarray(self.entries, dtype=np.float32)
        if entries.ndim != 2 or entries.shape[0] < 1 or entries.shape[1] < 1:
            raise ValueError("entries must be a non-empty M x p matrix")
        if not np.isfinite(entries).all():
            raise ValueError("entries must be finite")
        entries.flags.writeable = False
        object.__setattr__(self, "entries", entries)
        if self.source_ids is not None:
            ids = np.ascontiguousarray(self.source_ids, dtype=np.int64)
            if ids.shape != (entries.shape[0],):
                raise ValueError("need exactly one source id per entry")
            if ids.min() < 0:
                raise ValueError("source ids must be non-negative")
            ids.flags.writeable = False
            object.__setattr__(self, "source_ids", ids)

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def p(self) -> int:
        return self.entries.shape[1]


def l2_distance(a, b) -> float:
    """Euclidean distance between two embeddings, accumulated in float64."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 1 or a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    d = a - b
    return float(np.sqrt(np.sum(d * d)))


def save_dataset(ds: LabeledDataset, path) -> None:
    """Write a dataset in the SEMB format; byte output is deterministic."""
    if ds.labels.max() >= 2**16:
        raise ValueError("labels exceed the u16 range of the SEMB format")
    header = _DATASET_HEADER.pack(DATASET_MAGIC, 1, 0, 0, ds.n, ds.p, ds.n_class)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(ds.embeddings.astype("<f4", copy=False).tobytes())
        fh.write(ds.labels.astype("<u2").tobytes())


def load_dataset(path) -> LabeledDataset:
    """Read a SEMB file; round-trips save_dataset output bit-exactly."""
    blob = Path(path).read_bytes()
    if len(blob) < _DATASET_HEADER.size:
        raise FormatError("header", len(blob), "truncated header")
    magic, version, dtype_code, reserved, n, p, n_class = _DATASET_HEADER.unpack_from(blob)
    if magic != DATASET_MAGIC:
        raise FormatError("magic", 0, f"bad magic {magic!r}")
    if version != 1:
        raise FormatError("version", 4, f"unsupported version {version}")
    if dtype_code != 0:
        raise FormatError("dtype", 5, f"unsupported dtype code {dtype_code}")
    if reserved != 0:
        raise FormatError("reserved", 6, f"reserved field must be 0, got {reserved}")
    if n < 1:
        raise FormatError("N", 8, "N must be >= 1")
    if p < 1:
        raise FormatError("p", 12, "p must be >= 1")
    if n_class < 1:
        raise FormatError("n_class", 16, "n_class must be >= 1")
    emb_off = _DATASET_HEADER.size
    lab_off = emb_off + 4 * n * p
    need = lab_off + 2 * n
    if len(blob) < need:
        raise FormatError("payload", len(blob), f"truncated payload, need {need} bytes")
    if len(blob) > need:
        raise FormatError("payload", need, "trailing bytes after payload")
    emb = np.frombuffer(blob, dtype="<f4", count=n * p, offset=emb_off).reshape(n, p)
    if not np.isfinite(emb).all():
        bad = int(np.flatnonzero(~np.isfinite(emb.ravel()))[0])
        raise FormatError("embeddings", emb_off + 4 * bad, "non-finite embedding value")
    labels = np.frombuffer(blob, dtype="<u2", count=n, offset=lab_off).astype(np.int64)
    if labels.max() >= n_class:
        bad = int(np.flatnonzero(labels >= n_class)[0])
        raise FormatError("labels", lab_off + 2 * bad, f"label {int(labels[bad])} >= n_class {n_class}")
    return LabeledDataset(emb, labels, n_class)


def save_codebook(cb: Codebook, path) -> None:
    """Write a codebook in the SCBK format."""
    has_ids = 1 if cb.source_ids is not None else 0
    if has_ids and cb.source_ids.max() >= 2**32:
        raise ValueError("source ids exceed the u32 range of the SCBK format")
    header = _CODEBOOK_HEADER.pack(CODEBOOK_MAGIC, 1, has_ids, 0, cb.m, cb.p)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(cb.entries.astype("<f4", copy=False).tobytes())
        if has_ids:
            fh.write(cb.source_ids.astype("<u4").tobytes())


def load_codebook(path) -> Codebook:
    """Read an SCBK file; round-trips save_codebook output bit-exactly."""
    blob = Path(path).read_bytes()
    if len(blob) < _CODEBOOK_HEADER.size:
        raise FormatError("header", len(blob), "truncated header")
    magic, version, has_ids, reserved, m, p = _CODEBOOK_HEADER.unpack_from(blob)
    if magic != CODEBOOK_MAGIC:
        raise FormatError("magic", 0, f"bad magic {magic!r}")
    if version != 1:
        raise FormatError("version", 4, f"unsupported version {version}")
    if has_ids not in (0, 1):
        raise FormatError("has_source_ids", 5, f"flag must be 0 or 1, got {has_ids}")
    if reserved != 0:
        raise FormatError("reserved", 6, f"reserved field must be 0, got {reserved}")
    if m < 1:
        raise FormatError("M", 8, "M must be >= 1")
    if p < 1:
        raise FormatError("p", 12, "p must be >= 1")
    ent_off = _CODEBOOK_HEADER.size
    ids_off = ent_off + 4 * m * p
    need = ids_off + (4 * m if has_ids else 0)
    if len(blob) < need:
        raise FormatError("payload", len(blob), f"truncated payload, need {need} bytes")
    if len(blob) > need:
        raise FormatError("payload", need, "trailing bytes after payload")
    entries = np.frombuffer(blob, dtype="<f4", count=m * p, offset=ent_off).reshape(m, p)
    if not np.isfinite(entries).all():
        bad = int(np.flatnonzero(~np.isfinite(entries.ravel()))[0])
        raise FormatError("entries", ent_off + 4 * bad, "non-finite codebook value")
    source_ids = None
    if has_ids:
        source_ids = np.frombuffer(blob, dtype="<u4", count=m, offset=ids_off).astype(np.int64)
    return Codebook(entries, source_ids)


def generate_synthetic(n_class: int, per_class: int, p: int, spread: float, seed: int) -> LabeledDataset:
    """Class-structured synthetic embeddings: unit-norm centers at pairwise
    distance >= 0.5 (rejection sampling), plus isotropic Gaussian spread.

    Deterministic given all arguments; class c occupies rows
    [c*per_class, (c+1)*per_class).
    """
    if n_class < 2:
        raise ValueError("n_class must be >= 2")
    if per_class < 1:
        raise ValueError("per_class must be >= 1")
    if p < 2:
        raise ValueError("p must be >= 2")
    if not spread > 0:
        raise ValueError("spread must be > 0")
    rng = Rng(seed)
    cgen = rng.substream("centers").gen
    centers: list[np.ndarray] = []
    for _ in range(n_class):
        for _ in range(_CENTER_RETRY_BUDGET):
            v = cgen.standard_normal(p)
            norm = np.linalg.norm(v)
            if norm == 0.0:
                continue
            v /= norm
            if all(np.linalg.norm(v - u) >= _MIN_CENTER_DISTANCE for u in centers):
                centers.append(v)
                break
        else:
            raise ValueError(
                f"could not place {n_class} centers {_MIN_CENTER_DISTANCE} apart "
                f"within {_CENTER_RETRY_BUDGET} tries; increase p"
            )
    sgen = rng.substream("samples").gen
    blocks = [c + spread * sgen.standard_normal((per_class, p)) for c in centers]
    embeddings = np.vstack(blocks)
    labels = np.repeat(np.arange(n_class), per_class)
    return LabeledDataset(embeddings, labels, n_class)
