import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semkb.classical import reed_solomon as rs

symbols = st.lists(st.integers(0, 7), min_size=5, max_size=5)


def slow_mul(a, b):
    """Carry-less multiplication reduced modulo x^3 + x + 1."""
    p = 0
    for i in range(3):
        if (b >> i) & 1:
            p ^= a << i
    for deg in (4, 3):
        if p >> deg & 1:
            p ^= 0b1011 << (deg - 3)
    return p


def evaluate(codeword, x):
    acc = 0
    for c in codeword:
        acc = slow_mul(acc, x) ^ int(c)
    return acc


ALPHA = 2  # the class of x is primitive for x^3 + x + 1


def test_field_tables_match_slow_arithmetic():
    for a, b in itertools.product(range(8), repeat=2):
        assert rs.gf_mul(a, b) == slow_mul(a, b)


def test_generator_has_two_consecutive_roots():
    g = rs.GENERATOR
    assert evaluate(g, ALPHA) == 0 and evaluate(g, slow_mul(ALPHA, ALPHA)) == 0
    assert rs.T == 1


def test_zero_message_encodes_to_zero():
    assert not rs.rs_encode([0] * 5).any()


@given(symbols, symbols)
def test_encoding_is_systematic_linear_and_has_roots(m1, m2):
    c1, c2 = rs.rs_encode(m1), rs.rs_encode(m2)
    assert list(c1[:5]) == m1
    assert evaluate(c1, ALPHA) == 0 and evaluate(c1, slow_mul(ALPHA, ALPHA)) == 0
    np.testing.assert_array_equal(rs.rs_encode(np.bitwise_xor(m1, m2)), c1 ^ c2)


@given(symbols, st.integers(0, 6), st.integers(1, 7))
def test_single_error_corrected(msg, pos, err):
    cw = rs.rs_encode(msg)
    cw[pos] ^= err
    out, count, failed = rs.rs_decode(cw)
    assert list(out) == msg and count == 1 and not failed


def test_minimum_distance_is_three():
    # brute-force oracle over all codewords (linear code: min weight of nonzero words)
    msgs = np.array(list(itertools.product(range(8), repeat=5)))
    cws = rs.rs_encode_many(msgs)
    weights = (cws != 0).sum(axis=1)
    assert weights[1:].min() == 3


def test_double_errors_are_failed_or_flagged_miscorrections():
    rng = np.random.default_rng(0)
    msgs = rng.integers(0, 8, size=(300, 5))
    for m in msgs:
        cw = rs.rs_encode(m)
        for i, j in itertools.combinations(range(7), 2):
            bad = cw.copy()
            bad[i] ^= rng.integers(1, 8)
            bad[j] ^= rng.integers(1, 8)
            out, count, failed = rs.rs_decode(bad)
            assert count <= rs.T
            if failed:
                assert count == 0
            else:
                # a miscorrection lands on a different codeword one symbol away and says so
                fixed = rs.rs_encode(out)
                assert count == 1 and (fixed != bad).sum() == 1 and list(out) != list(m)


def test_bit_level_round_trip_with_padding():
    bits = np.random.default_rng(1).integers(0, 2, 37).astype(np.uint8)
    coded, pad = rs.rs_encode_bits(bits)
    assert coded.size % 21 == 0 and pad == (-37) % 15
    back, corrections, failures = rs.rs_decode_bits(coded, pad)
    np.testing.assert_array_equal(back, bits)
    assert corrections == failures == 0


def test_invalid_symbols_rejected():
    with pytest.raises(ValueError):
        rs.rs_decode([8, 0, 0, 0, 0, 0, 0])
