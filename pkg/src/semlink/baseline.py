"""Semantic-agnostic text baseline: Huffman block coding over 3-character
groups, with an escape symbol for groups unseen in the training corpus."""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import FormatError

GROUP_LEN = 3
_RAW_BITS = 8 * GROUP_LEN
# The escape sorts after every byte triple.
_ESCAPE_KEY = (1, b"")


def _pad_groups(data: bytes) -> list[bytes]:
    if len(data) % GROUP_LEN:
        data += b"\x00" * (GROUP_LEN - len(data) % GROUP_LEN)
    return [data[i : i + GROUP_LEN] for i in range(0, len(data), GROUP_LEN)]


@dataclass(frozen=True)
class HuffmanTable:
    """Canonical prefix codes over 3-byte groups plus one escape code."""

    codes: dict  # bytes -> bit string
    escape_code: str

    def code_lengths(self) -> list[int]:
        return [len(c) for c in self.codes.values()] + [len(self.escape_code)]

    def kraft_sum(self) -> float:
        return sum(2.0 ** -length for length in self.code_lengths())


def _code_lengths(counts: list[tuple[tuple, int]]) -> dict:
    """Huffman code lengths with deterministic tie-breaking: equal-weight heap
    entries resolve by symbol order for leaves, then by merge order."""
    if len(counts) == 1:
        return {counts[0][0]: 1}
    heap = []
    trees = {}
    for order, (key, count) in enumerate(sorted(counts)):
        heap.append((count, order, key))
        trees[key] = [key]
    heapq.heapify(heap)
    depth = {key: 0 for key, _ in counts}
    next_order = len(counts)
    while len(heap) > 1:
        c1, _, k1 = heapq.heappop(heap)
        c2, _, k2 = heapq.heappop(heap)
        merged = trees.pop(k1) + trees.pop(k2)
        for key in merged:
            depth[key] += 1
        token = ("node", next_order)
        trees[token] = merged
        heapq.heappush(heap, (c1 + c2, next_order, token))
        next_order += 1
    return depth


def build_huffman(corpus: list[str]) -> HuffmanTable:
    """Count 3-byte groups over NUL-padded texts (raw UTF-8 bytes), add an
    escape symbol with count 1, and assign canonical codes ordered by
    (length, symbol)."""
    if not corpus:
        raise ValueError("corpus must be non-empty")
    counter: Counter = Counter()
    for text in corpus:
        counter.update(_pad_groups(text.encode("utf-8")))
    counts = [((0, group), count) for group, count in counter.items()]
    counts.append((_ESCAPE_KEY, 1))
    lengths = _code_lengths(counts)
    # canonical assignment: sort by (length, symbol), codes count upward
    ordered = sorted(lengths.items(), key=lambda kv: (kv[1], kv[0]))
    codes: dict = {}
    escape_code = ""
    code = 0
    prev_len = ordered[0][1]
    for key, length in ordered:
        code <<= length - prev_len
        prev_len = length
        bits = format(code, f"0{length}b")
        if key == _ESCAPE_KEY:
            escape_code = bits
        else:
            codes[key[1]] = bits
        code += 1
    return HuffmanTable(codes, escape_code)


def huffman_encode(table: HuffmanTable, text: str) -> np.ndarray:
    """Encode one message to a bit array; out-of-vocabulary groups emit the
    escape code followed by the 24 raw bits of the group."""
    pieces = []
    for group in _pad_groups(text.encode("utf-8")):
        code = table.codes.get(group)
        if code is None:
            raw = int.from_bytes(group, "big")
            pieces.append(table.escape_code + format(raw, f"0{_RAW_BITS}b"))
        else:
            pieces.append(code)
    bits = "".join(pieces)
    return np.fromiter(map(int, bits), dtype=np.uint8, count=len(bits))


def huffman_decode(table: HuffmanTable, bits) -> str:
    """Decode a bit array produced with the same table; trailing NUL padding is
    stripped. Bits that do not complete a codeword raise a format error."""
    bits = np.asarray(bits, dtype=np.uint8)
    lookup = {code: group for group, code in table.codes.items()}
    out = bytearray()
    current = ""
    i = 0
    n = bits.size
    stream = bits.tolist()
    while i < n:
        current += "01"[stream[i]]
        i += 1
        if current == table.escape_code:
            if i + _RAW_BITS > n:
                raise FormatError("escape-literal", i, "truncated escape literal")
            raw = 0
            for j in range(_RAW_BITS):
                raw = (raw << 1) | stream[i + j]
            i += _RAW_BITS
            out += raw.to_bytes(GROUP_LEN, "big")
            current = ""
        elif current in lookup:
            out += lookup[current]
            current = ""
    if current:
        raise FormatError("bitstream", n, f"dangling bits {current!r} at end of stream")
    return out.rstrip(b"\x00").decode("utf-8")


def serialize_table(table: HuffmanTable) -> str:
    """Text form: one `hex(group) <space> bits` line per code, escape last."""
    lines = [f"{group.hex()} {code}" for group, code in sorted(table.codes.items())]
    lines.append(f"escape {table.escape_code}")
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> HuffmanTable:
    codes: dict = {}
    escape_code = None
    for ln, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            key, bits = line.split()
        except ValueError:
            raise FormatError("line", ln, f"expected 'hex bits' on line {ln}") from None
        if set(bits) - {"0", "1"}:
            raise FormatError("code", ln, f"non-binary code on line {ln}")
        if key == "escape":
            escape_code = bits
        else:
            group = bytes.fromhex(key)
            if len(group) != GROUP_LEN:
                raise FormatError("group", ln, f"group on line {ln} is not {GROUP_LEN} bytes")
            codes[group] = bits
    if escape_code is None:
        raise FormatError("escape", 0, "table is missing the escape code")
    return HuffmanTable(codes, escape_code)


def encoded_bit_count(table: HuffmanTable, texts: list[str]) -> int:
    """Total encoded size of a message list, in bits."""
    return sum(int(huffman_encode(table, t).size) for t in texts)
