import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from semkb.classical.ldpc import (
    LdpcCode,
    LdpcConstructionError,
    format_alist,
    four_cycle_count,
    gallager_code,
    gf2_rref,
    parse_alist,
    read_alist,
    write_alist,
)
from semkb.harness.experiments import default_ldpc

ASSET = Path(__file__).parent / "assets" / "gallager_12_3_4.alist"


@pytest.fixture(scope="module")
def small():
    return LdpcCode(read_alist(ASSET))


def gf2_rank(A):
    """Rank by plain elimination on Python ints (rows as bit masks)."""
    rows = [int("".join(map(str, r)), 2) for r in np.asarray(A)]
    rank = 0
    while rows:
        pivot = max(rows)
        rows.remove(pivot)
        if pivot == 0:
            continue
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if r >> top & 1 else r for r in rows]
    return rank


def test_asset_shape_and_weights():
    H = read_alist(ASSET)
    assert H.shape == (9, 12)
    assert set(H.sum(axis=0)) == {3} and set(H.sum(axis=1)) == {4}


@given(st.integers(1, 8), st.integers(2, 10), st.integers(0, 10**6))
def test_alist_round_trip_and_rank(m, n, seed):
    H = (np.random.default_rng(seed).random((m, n)) < 0.4).astype(np.uint8)
    H[0, 0] = 1
    assert np.array_equal(parse_alist(format_alist(H)), H)
    _, pivots, rows = gf2_rref(H)
    assert len(pivots) == len(rows) == gf2_rank(H)


def test_alist_file_io(tmp_path, small):
    write_alist(small.H_input, tmp_path / "h.alist")
    assert np.array_equal(read_alist(tmp_path / "h.alist"), small.H_input)


def test_redundant_rows_removed(small):
    assert small.rank == gf2_rank(small.H_input) == small.H.shape[0]
    assert small.k == small.n - small.rank


def test_every_codeword_satisfies_checks(small):
    for u in itertools.product((0, 1), repeat=small.k):
        c = small.encode(u)
        assert not ((small.H_input.astype(int) @ c) % 2).any()
        np.testing.assert_array_equal(small.extract(c), u)


def test_noiseless_llrs_converge_immediately(small):
    c = small.encode([1, 0, 1, 1, 0][: small.k])
    hard, ok, iters = small.decode(np.where(c == 0, 30.0, -30.0))
    assert ok and iters == 1 and np.array_equal(hard, c)


@pytest.mark.parametrize("magnitude", [5.0, 20.0])
def test_single_flip_corrected_on_asset(small, magnitude):
    # direct simulation oracle: every codeword, every single flipped bit
    for u in itertools.product((0, 1), repeat=small.k):
        c = small.encode(u)
        for j in range(small.n):
            llr = np.where(c == 0, magnitude, -magnitude)
            llr[j] = -llr[j]
            hard, ok, _ = small.decode(llr)
            assert ok and np.array_equal(hard, c)


@given(st.lists(st.floats(-8, 8), min_size=12, max_size=12))
def test_converged_flag_matches_syndrome(llr):
    code = LdpcCode(read_alist(ASSET))
    hard, ok, iters = code.decode(np.array(llr), max_iters=5)
    assert ok == (not code.syndrome(hard).any())
    assert 1 <= iters <= 5


def test_construction_errors():
    with pytest.raises(LdpcConstructionError):
        LdpcCode(np.zeros((2, 4), dtype=np.uint8))
    with pytest.raises(LdpcConstructionError):
        LdpcCode(np.eye(3, dtype=np.uint8))
    with pytest.raises(ValueError):
        LdpcCode(read_alist(ASSET)).decode(np.zeros(5))


def test_shipped_pipeline_code():
    code = default_ldpc()
    assert code.n == 216 and four_cycle_count(code.H_input) == 0
    assert code.rate == pytest.approx(2 / 3, abs=0.02)
    rng = np.random.default_rng(0)
    u = rng.integers(0, 2, code.k)
    c = code.encode(u)
    assert not code.syndrome(c).any()
    # BPSK over AWGN at a comfortable SNR decodes cleanly
    y = (1 - 2.0 * c) + rng.normal(0, 0.5, code.n)
    hard, ok, _ = code.decode(2 * y / 0.25)
    assert ok and np.array_equal(code.extract(hard), u)


def test_gallager_construction_removes_four_cycles():
    H = gallager_code(48, 3, 6, seed=1)
    assert H.shape == (24, 48)
    assert set(H.sum(axis=0)) == {3} and set(H.sum(axis=1)) == {6}
    assert four_cycle_count(H) == 0
