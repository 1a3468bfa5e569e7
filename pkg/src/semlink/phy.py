"""Digital physical layer: fixed-width index packing, systematic Reed-Solomon
coding at rate 25/31 over GF(2^5), Gray-mapped QPSK, and AWGN / channel-inverted
Rayleigh fading.

Field conventions (interoperability depends on these): primitive polynomial
x^5 + x^2 + 1, generator alpha = 2, narrow-sense generator polynomial with
roots alpha^1 .. alpha^6. Codewords are systematic: 25 message symbols followed
by 6 parity symbols, message symbol 0 holding the highest-degree coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Rng

GF_SIZE = 32
GF_POLY = 0x25  # x^5 + x^2 + 1
RS_N = 31
RS_K = 25
RS_T = 3
BLOCK_INFO_BITS = RS_K * 5  # 125 info bits per RS block
BLOCK_CODED_BITS = RS_N * 5

_INV_SQRT2 = 1.0 / np.sqrt(2.0)

# log/antilog tables; the antilog table is doubled so products of two logs
# (each <= 30) index it without a modulo.
_EXP = [0] * 62
_LOG = [0] * GF_SIZE


def _build_tables() -> None:
    x = 1
    for i in range(31):
        _EXP[i] = x
        _LOG[x] = i
        x <<= 1
        if x & GF_SIZE:
            x ^= GF_POLY
    for i in range(31, 62):
        _EXP[i] = _EXP[i - 31]


_build_tables()
_EXPV = np.array(_EXP, dtype=np.int64)
_LOGV = np.array(_LOG, dtype=np.int64)


def gf32_mul(a: int, b: int) -> int:
    """Product in GF(32) under x^5 + x^2 + 1."""
    if a == 0 or b == 0:
        return 0
    return _EXP[_LOG[a] + _LOG[b]]


def gf32_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in GF(32)")
    return _EXP[31 - _LOG[a]]


def gf32_div(a: int, b: int) -> int:
    if b == 0:
        raise ZeroDivisionError("division by 0 in GF(32)")
    if a == 0:
        return 0
    return _EXP[_LOG[a] + 31 - _LOG[b]]


def gf32_pow(a: int, n: int) -> int:
    if a == 0:
        return 0 if n else 1
    return _EXP[(_LOG[a] * n) % 31]


def _generator_poly() -> list[int]:
    # prod_{i=1..6} (x - alpha^i), coefficients highest degree first, monic.
    g = [1]
    for i in range(1, 2 * RS_T + 1):
        root = _EXP[i]
        nxt = [0] * (len(g) + 1)
        for j, c in enumerate(g):
            nxt[j] ^= gf32_mul(c, 1)
            nxt[j + 1] ^= gf32_mul(c, root)
        g = nxt
    return g


_GEN = _generator_poly()


def rs_encode(msg) -> list[int]:
    """Systematic RS(31,25) encoding: parity is msg(x) * x^6 mod g(x)."""
    msg = list(int(s) for s in msg)
    if len(msg) != RS_K:
        raise ValueError(f"message must have exactly {RS_K} symbols, got {len(msg)}")
    if any(not 0 <= s < GF_SIZE for s in msg):
        raise ValueError("message symbols must lie in [0, 32)")
    exp, log, gen = _EXP, _LOG, _GEN
    rem = [0] * (2 * RS_T)
    for c in msg:
        factor = c ^ rem[0]
        rem.pop(0)
        rem.append(0)
        if factor:
            lf = log[factor]
            for j in range(2 * RS_T):
                gj = gen[j + 1]
                if gj:
                    rem[j] ^= exp[lf + log[gj]]
    return msg + rem


@dataclass(frozen=True)
class RsDecodeResult:
    """Decoded message plus bookkeeping. On failure the raw systematic symbols
    are delivered as a best-effort payload and `failed` is set; the link keeps
    running and the damage is measured downstream."""

    message: list[int]
    corrected: int
    failed: bool


def _syndromes(symbols) -> list[int]:
    exp, log = _EXP, _LOG
    out = []
    for i in range(1, 2 * RS_T + 1):
        y = 0
        for s in symbols:
            if y:
                y = exp[log[y] + i]
            y ^= s
        out.append(y)
    return out


def _berlekamp_massey(synd: list[int]) -> tuple[list[int], int]:
    # Error locator C(x), coefficients lowest degree first, C[0] = 1.
    exp, log = _EXP, _LOG
    c = [1]
    b = [1]
    length = 0
    m = 1
    bb = 1
    for n in range(len(synd)):
        d = synd[n]
        for i in range(1, length + 1):
            ci = c[i] if i < len(c) else 0
            si = synd[n - i]
            if ci and si:
                d ^= exp[log[ci] + log[si]]
        if d == 0:
            m += 1
            continue
        coef = gf32_div(d, bb)
        lc = log[coef]
        if 2 * length <= n:
            prev = c.copy()
            if len(c) < len(b) + m:
                c = c + [0] * (len(b) + m - len(c))
            for i, bv in enumerate(b):
                if bv:
                    c[i + m] ^= exp[lc + log[bv]]
            length = n + 1 - length
            b = prev
            bb = d
            m = 1
        else:
            if len(c) < len(b) + m:
                c = c + [0] * (len(b) + m - len(c))
            for i, bv in enumerate(b):
                if bv:
                    c[i + m] ^= exp[lc + log[bv]]
            m += 1
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c, length


def _poly_eval_low(coeffs: list[int], x: int) -> int:
    # coeffs lowest degree first
    exp, log = _EXP, _LOG
    y = 0
    for c in reversed(coeffs):
        if y:
            y = exp[log[y] + log[x]] if x else 0
        y ^= c
    return y


def rs_decode(received) -> RsDecodeResult:
    """Bounded-distance decode correcting up to 3 symbol errors
    (syndromes -> Berlekamp-Massey -> Chien search -> Forney)."""
    symbols = [int(s) for s in received]
    if len(symbols) != RS_N:
        raise ValueError(f"codeword must have exactly {RS_N} symbols, got {len(symbols)}")
    if any(not 0 <= s < GF_SIZE for s in symbols):
        raise ValueError("received symbols must lie in [0, 32)")
    synd = _syndromes(symbols)
    if not any(synd):
        return RsDecodeResult(symbols[:RS_K], 0, False)
    fail = RsDecodeResult(symbols[:RS_K], 0, True)
    locator, length = _berlekamp_massey(synd)
    if length > RS_T or len(locator) - 1 != length:
        return fail
    # Chien search: error at degree d when the locator vanishes at alpha^{-d};
    # symbol index is 30 - d.
    exp = _EXP
    roots = []
    degrees = []
    for d in range(RS_N):
        xinv = exp[(31 - d) % 31]
        if _poly_eval_low(locator, xinv) == 0:
            roots.append(xinv)
            degrees.append(d)
    if len(degrees) != length:
        return fail
    # Forney with first consecutive root alpha^1: omega = S(x) C(x) mod x^6,
    # magnitude = omega(Xinv) / C'(Xinv).
    omega = [0] * (2 * RS_T)
    for i, s in enumerate(synd):
        if not s:
            continue
        ls = _LOG[s]
        for j, cj in enumerate(locator):
            if cj and i + j < 2 * RS_T:
                omega[i + j] ^= exp[ls + _LOG[cj]]
    deriv = [locator[i] if i % 2 == 1 else 0 for i in range(1, len(locator))]
    corrected = list(symbols)
    for xinv, d in zip(roots, degrees):
        den = _poly_eval_low(deriv, xinv)
        if den == 0:
            return fail
        num = _poly_eval_low(omega, xinv)
        corrected[RS_N - 1 - d] ^= gf32_div(num, den)
    if any(_syndromes(corrected)):
        return fail
    return RsDecodeResult(corrected[:RS_K], length, False)


def pack_indices(indices, bit_width: int) -> np.ndarray:
    """Big-endian fixed-width bit stream over all indices, zero-padded to whole
    RS message blocks (multiples of 125 bits)."""
    if bit_width < 1:
        raise ValueError("bit_width must be >= 1")
    idx = np.asarray(indices, dtype=np.int64)
    if idx.ndim != 1:
        raise ValueError("indices must be a flat sequence")
    if idx.size and (idx.min() < 0 or idx.max() >= (1 << bit_width)):
        raise ValueError(f"index out of range for bit width {bit_width}")
    shifts = np.arange(bit_width - 1, -1, -1, dtype=np.int64)
    bits = ((idx[:, None] >> shifts) & 1).astype(np.uint8).ravel()
    pad = (-bits.size) % BLOCK_INFO_BITS
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    return bits


def unpack_indices(bits, count: int, bit_width: int) -> np.ndarray:
    """Inverse of pack_indices given the original (count, bit_width)."""
    bits = np.asarray(bits, dtype=np.uint8)
    need = count * bit_width
    if bits.size < need:
        raise ValueError(f"bit stream too short: need {need}, got {bits.size}")
    weights = 1 << np.arange(bit_width - 1, -1, -1, dtype=np.int64)
    return bits[:need].reshape(count, bit_width).astype(np.int64) @ weights


def bits_to_gf_symbols(bits) -> np.ndarray:
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 5:
        raise ValueError("bit count must be a multiple of 5")
    weights = 1 << np.arange(4, -1, -1, dtype=np.int64)
    return bits.reshape(-1, 5).astype(np.int64) @ weights


def gf_symbols_to_bits(symbols) -> np.ndarray:
    sym = np.asarray(symbols, dtype=np.int64)
    shifts = np.arange(4, -1, -1, dtype=np.int64)
    return ((sym[:, None] >> shifts) & 1).astype(np.uint8).ravel()


def qpsk_modulate(bits) -> np.ndarray:
    """Gray mapping per dibit: 00 -> (+1+j)/sqrt2, 01 -> (-1+j)/sqrt2,
    11 -> (-1-j)/sqrt2, 10 -> (+1-j)/sqrt2. Odd bit counts are padded with one
    zero bit; callers track the true length. Every symbol has unit energy."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size % 2:
        bits = np.concatenate([bits, np.zeros(1, dtype=np.uint8)])
    b0 = bits[0::2]
    b1 = bits[1::2]
    re = np.where(b1 == 0, _INV_SQRT2, -_INV_SQRT2)
    im = np.where(b0 == 0, _INV_SQRT2, -_INV_SQRT2)
    return re + 1j * im


def qpsk_demodulate(received) -> np.ndarray:
    """Hard decision by quadrant; zero components count as positive."""
    rx = np.asarray(received, dtype=np.complex128)
    out = np.empty(2 * rx.size, dtype=np.uint8)
    out[0::2] = rx.imag < 0
    out[1::2] = rx.real < 0
    return out


@dataclass(frozen=True)
class ChannelConfig:
    """kind is "awgn" or "rayleigh_inverted"; noise variance follows the
    SNR convention sigma_Z^2 = 10^(-snr_db/10) under unit input power."""

    kind: str
    snr_db: float
    seed: int
    inversion_clip: float = 0.0

    def __post_init__(self):
        if self.kind not in ("awgn", "rayleigh_inverted"):
            raise ValueError(f"unknown channel kind {self.kind!r}")
        if self.inversion_clip < 0:
            raise ValueError("inversion_clip must be >= 0")

    @property
    def noise_variance(self) -> float:
        return 10.0 ** (-self.snr_db / 10.0)


def channel(tx, cfg: ChannelConfig, rng: Rng) -> np.ndarray:
    """Apply the channel y = h x + z with per-symbol fading and complex Gaussian
    noise of total variance sigma_Z^2 (half per real dimension).

    Rayleigh runs with transmit-side channel inversion under perfect CSI: the
    transmitter sends x/h, so the receiver sees x + z. With inversion_clip > 0,
    symbols in fades |h| < clip are sent uninverted (bounded transmit power at
    the price of those symbols staying faded)."""
    tx = np.ascontiguousarray(tx, dtype=np.complex128)
    if tx.ndim != 1:
        raise ValueError("symbol stream must be 1-D")
    gen = rng.gen
    sigma2 = cfg.noise_variance
    if cfg.kind == "rayleigh_inverted":
        # h ~ CN(0,1) per symbol, drawn before the noise
        h = gen.standard_normal(2 * tx.size).view(np.complex128) * np.sqrt(0.5)
        if cfg.inversion_clip > 0:
            deep = np.abs(h) < cfg.inversion_clip
            sent = np.where(deep, tx, tx / h)
        else:
            sent = tx / h
        faded = h * sent
    else:
        faded = tx
    out = gen.standard_normal(2 * tx.size).view(np.complex128)
    out *= np.sqrt(sigma2 / 2.0)
    out += faded
    return out


@dataclass(frozen=True)
class LinkStats:
    """Per-transmission link report (information bits are pre-FEC)."""

    n_indices: int
    n_info_bits: int
    n_blocks: int
    n_coded_bits: int
    pre_fec_bit_errors: int
    post_fec_symbol_errors: int
    decode_failures: int
    symbols_corrected: int


def _syndromes_batch(blocks: np.ndarray) -> np.ndarray:
    """Vectorized syndrome computation over (B, 31) symbol blocks -> (B, 6)."""
    b = blocks.shape[0]
    out = np.zeros((b, 2 * RS_T), dtype=np.int64)
    for i in range(1, 2 * RS_T + 1):
        y = np.zeros(b, dtype=np.int64)
        for col in range(RS_N):
            nz = y != 0
            y[nz] = _EXPV[_LOGV[y[nz]] + i]
            y ^= blocks[:, col]
        out[:, i - 1] = y
    return out


def transmit_indices(indices, bit_width: int, cfg: ChannelConfig) -> tuple[np.ndarray, LinkStats]:
    """Full chain: pack -> RS encode per block -> QPSK -> channel -> demodulate
    -> RS decode -> unpack. Channel damage is data, not an error; recovered
    indices may exceed the caller's codebook size and are clamped by the caller.
    """
    idx = np.asarray(indices, dtype=np.int64)
    info_bits = pack_indices(idx, bit_width)
    blocks = bits_to_gf_symbols(info_bits).reshape(-1, RS_K)
    coded = np.array([rs_encode(row) for row in blocks], dtype=np.int64).reshape(-1, RS_N)
    coded_bits = gf_symbols_to_bits(coded.ravel())
    tx = qpsk_modulate(coded_bits)
    rng = Rng(cfg.seed).substream("channel")
    rx = channel(tx, cfg, rng)
    rx_bits = qpsk_demodulate(rx)[: coded_bits.size]
    pre_fec = int(np.count_nonzero(rx_bits != coded_bits))
    rx_blocks = bits_to_gf_symbols(rx_bits).reshape(-1, RS_N)
    decoded = np.empty_like(blocks)
    failures = 0
    corrected_total = 0
    synd = _syndromes_batch(rx_blocks)
    dirty = np.flatnonzero(synd.any(axis=1))
    decoded[:] = rx_blocks[:, :RS_K]
    for bi in dirty:
        res = rs_decode(rx_blocks[bi])
        decoded[bi] = res.message
        failures += res.failed
        corrected_total += res.corrected
    post_fec = int(np.count_nonzero(decoded != blocks))
    rec_bits = gf_symbols_to_bits(decoded.ravel())
    rec_indices = unpack_indices(rec_bits, idx.size, bit_width)
    stats = LinkStats(
        n_indices=int(idx.size),
        n_info_bits=int(idx.size) * bit_width,
        n_blocks=int(blocks.shape[0]),
        n_coded_bits=int(coded_bits.size),
        pre_fec_bit_errors=pre_fec,
        post_fec_symbol_errors=post_fec,
        decode_failures=int(failures),
        symbols_corrected=int(corrected_total),
    )
    return rec_indices, stats
