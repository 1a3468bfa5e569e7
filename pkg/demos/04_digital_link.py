"""The digital pipe under the semantics: RS(31,25) + QPSK over noisy channels.

Index bits are packed into 125-bit blocks, protected by a rate-25/31
Reed-Solomon code over GF(32), Gray-mapped onto QPSK, and sent through AWGN or
Rayleigh fading with transmit-side channel inversion. This script checks the
simulated physics against closed-form QPSK theory and shows what the code
buys at the index level.
"""

import math

import numpy as np

from semlink.core import Rng
from semlink.phy import ChannelConfig, channel, qpsk_demodulate, qpsk_modulate, rs_decode, rs_encode, transmit_indices

# 1. Reed-Solomon at a glance: 3 symbol errors per 31-symbol block are free
g = np.random.default_rng(0)
msg = [int(v) for v in g.integers(0, 32, 25)]
cw = rs_encode(msg)
rx = list(cw)
for pos in (2, 17, 30):
    rx[pos] ^= 9
res = rs_decode(rx)
print(f"RS(31,25): injected 3 symbol errors -> corrected {res.corrected}, "
      f"message intact: {res.message == msg}")

# 2. QPSK symbol error rate vs the erfc formula
def analytic_ser(snr_db):
    q = 0.5 * math.erfc(math.sqrt(10 ** (snr_db / 10) / 2))
    return 2 * q - q * q

print("\nQPSK over AWGN, 10^6 symbols per point:")
print("snr_db   empirical    analytic")
for snr in (4.0, 8.0, 12.0):
    bits = g.integers(0, 2, 2 * 10**6).astype(np.uint8)
    tx = qpsk_modulate(bits)
    out = channel(tx, ChannelConfig("awgn", snr, 1), Rng(1).substream("demo", int(snr)))
    rxb = qpsk_demodulate(out)
    errs = np.count_nonzero((rxb[0::2] != bits[0::2]) | (rxb[1::2] != bits[1::2]))
    print(f"{snr:6.1f}   {errs / 10**6:.3e}   {analytic_ser(snr):.3e}")

# 3. end-to-end index delivery: coded link vs channel quality
print("\n2000 ten-bit indices through the full chain:")
print("snr_db  channel             pre-FEC BER  decode fails  index errors")
indices = g.integers(0, 1000, 2000)
for kind in ("awgn", "rayleigh_inverted"):
    for snr in (5.0, 10.0, 15.0):
        got, stats = transmit_indices(indices, 10, ChannelConfig(kind, snr, 99))
        ber = stats.pre_fec_bit_errors / stats.n_coded_bits
        idx_err = int(np.count_nonzero(got != indices))
        print(f"{snr:6.1f}  {kind:<18}  {ber:.4e}   {stats.decode_failures:5d}        {idx_err:5d}")
print("\nwith perfect channel inversion, Rayleigh behaves exactly like AWGN;")
print("the RS code turns a 1e-3-ish bit error rate into clean indices.")
