"""Reed-Solomon (7, 5) over GF(8), primitive polynomial x^3 + x + 1, single-error syndrome decoding.

Codewords are arrays of 7 symbols, highest-degree coefficient first; the
first 5 symbols are the message (systematic form). The generator has roots
alpha and alpha^2.
"""
from __future__ import annotations

import numpy as np

N, K = 7, 5
T = (N - K) // 2
PRIM_POLY = 0b1011

EXP = np.zeros(14, dtype=np.int64)
LOG = np.full(8, -1, dtype=np.int64)
_x = 1
for _i in range(7):
    EXP[_i] = EXP[_i + 7] = _x
    LOG[_x] = _i
    _x <<= 1
    if _x & 0b1000:
        _x ^= PRIM_POLY

MUL = np.zeros((8, 8), dtype=np.int64)
for _a in range(1, 8):
    for _b in range(1, 8):
        MUL[_a, _b] = EXP[LOG[_a] + LOG[_b]]
INV = np.zeros(8, dtype=np.int64)
for _a in range(1, 8):
    INV[_a] = EXP[(7 - LOG[_a]) % 7]


def gf_mul(a, b):
    return MUL[a, b]


def _poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] ^= int(MUL[a, b])
    return out


# g(x) = (x - a)(x - a^2), coefficients highest degree first
GENERATOR = tuple(_poly_mul([1, int(EXP[1])], [1, int(EXP[2])]))


def _parity(msg: np.ndarray) -> np.ndarray:
    """Remainder of m(x) x^2 divided by g(x), for a batch of messages (B, 5)."""
    rem = np.zeros((msg.shape[0], N - K), dtype=np.int64)
    g = GENERATOR
    for i in range(K):
        fb = msg[:, i] ^ rem[:, 0]
        rem[:, 0] = rem[:, 1] ^ MUL[fb, g[1]]
        rem[:, 1] = MUL[fb, g[2]]
    return rem


def rs_encode_many(messages) -> np.ndarray:
    m = np.asarray(messages, dtype=np.int64).reshape(-1, K)
    if np.any((m < 0) | (m > 7)):
        raise ValueError("symbols must lie in 0..7")
    return np.concatenate([m, _parity(m)], axis=1)


def rs_encode(message) -> np.ndarray:
    return rs_encode_many(np.asarray(message)[None, :])[0]


def syndromes(codewords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate each received polynomial at alpha and alpha^2."""
    c = np.asarray(codewords, dtype=np.int64)
    s1 = np.zeros(c.shape[0], dtype=np.int64)
    s2 = np.zeros(c.shape[0], dtype=np.int64)
    a1, a2 = int(EXP[1]), int(EXP[2])
    for i in range(N):
        s1 = MUL[s1, a1] ^ c[:, i]
        s2 = MUL[s2, a2] ^ c[:, i]
    return s1, s2


def rs_decode_many(codewords) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Batch decode.

    Returns (messages, corrected_count, failed). Failed words (exactly one
    zero syndrome, inconsistent with a single error) are passed through
    uncorrected with ``corrected_count`` 0.
    """
    c = np.array(codewords, dtype=np.int64).reshape(-1, N)
    if np.any((c < 0) | (c > 7)):
        raise ValueError("symbols must lie in 0..7")
    s1, s2 = syndromes(c)
    both = (s1 != 0) & (s2 != 0)
    failed = (s1 != 0) ^ (s2 != 0)
    count = both.astype(np.int64)
    rows = np.nonzero(both)[0]
    if rows.size:
        # single error of value e at power p: S1 = e a^p, S2 = e a^2p
        loc = MUL[s2[rows], INV[s1[rows]]]
        power = LOG[loc]
        value = MUL[s1[rows], INV[loc]]
        col = N - 1 - power
        c[rows, col] ^= value
    return c[:, :K], count, failed


def rs_decode(codeword) -> tuple[np.ndarray, int, bool]:
    m, count, failed = rs_decode_many(np.asarray(codeword)[None, :])
    return m[0], int(count[0]), bool(failed[0])


def bits_to_symbols(bits: np.ndarray) -> np.ndarray:
    b = np.asarray(bits, dtype=np.int64).reshape(-1, 3)
    return (b[:, 0] << 2) | (b[:, 1] << 1) | b[:, 2]


def symbols_to_bits(symbols: np.ndarray) -> np.ndarray:
    s = np.asarray(symbols, dtype=np.int64).reshape(-1)
    return np.stack([(s >> 2) & 1, (s >> 1) & 1, s & 1], axis=1).reshape(-1).astype(np.uint8)


def rs_encode_bits(bits) -> tuple[np.ndarray, int]:
    """Channel-encode a bit stream; returns (coded bits, pad length)."""
    b = np.asarray(bits, dtype=np.uint8)
    pad = (-b.size) % (3 * K)
    b = np.concatenate([b, np.zeros(pad, dtype=np.uint8)])
    cw = rs_encode_many(bits_to_symbols(b).reshape(-1, K))
    return symbols_to_bits(cw), pad


def rs_decode_bits(bits, pad: int) -> tuple[np.ndarray, int, int]:
    """Inverse of ``rs_encode_bits``; returns (bits, corrections, failures)."""
    sym = bits_to_symbols(np.asarray(bits, dtype=np.uint8)).reshape(-1, N)
    msg, count, failed = rs_decode_many(sym)
    out = symbols_to_bits(msg)
    if pad:
        out = out[:-pad]
    return out, int(count.sum()), int(failed.sum())
