"""Code description: construction, CRC, encoding, frozen-set files."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polarscl import (
    PolarCode,
    assemble_source_word,
    construct_frozen_set,
    count_frozen_siblings,
    crc_check,
    crc_compute,
    encode,
    extract_payload,
    load_frozen_set,
    source_word_passes_crc,
)
from polarscl.polar_code import (
    CRC16_CCITT,
    FrozenSetFormatError,
    bhattacharyya_parameters,
)

from conftest import crc_longdiv, dense_generator


# ---------------------------------------------------------------------------
# PolarCode validation

def test_code_basic_properties(small_code):
    assert small_code.N == 32
    assert small_code.info_bit_count == small_code.K - small_code.r
    assert np.count_nonzero(small_code.frozen_mask) == small_code.N - small_code.K
    assert small_code.info_positions.size == small_code.K
    assert not small_code.frozen_mask[small_code.info_positions].any()


@pytest.mark.parametrize("kwargs", [
    dict(n=0, K=1),
    dict(n=3, K=0),
    dict(n=3, K=9),
    dict(n=3, K=4, r=4),
    dict(n=3, K=4, r=2, crc_poly=0),
    dict(n=3, K=4, r=2, crc_poly=4),
    dict(n=3, K=4, frozen_set=frozenset({0, 1, 2})),
    dict(n=3, K=4, frozen_set=frozenset({0, 1, 2, 8})),
])
def test_code_rejects_bad_parameters(kwargs):
    kwargs.setdefault("frozen_set",
                      frozenset(range((1 << kwargs["n"]) - kwargs["K"]))
                      if 0 < kwargs["K"] <= (1 << kwargs["n"]) else frozenset())
    with pytest.raises(ValueError):
        PolarCode(**kwargs)


# ---------------------------------------------------------------------------
# reliability construction

def test_bhattacharyya_initial_value():
    z = bhattacharyya_parameters(0, 2.0, rate=0.5)
    assert z.shape == (1,)
    assert z[0] == pytest.approx(np.exp(-0.5 * 10 ** 0.2))


def test_bhattacharyya_single_step_values():
    z0 = float(bhattacharyya_parameters(0, 2.0, rate=0.5)[0])
    z1 = bhattacharyya_parameters(1, 2.0, rate=0.5)
    assert z1[0] == pytest.approx(2 * z0 - z0 * z0)  # degraded channel
    assert z1[1] == pytest.approx(z0 * z0)           # upgraded channel


def test_bhattacharyya_ordering_matches_natural_bit_order():
    # Index 0 (all-degraded) must be the least reliable channel, index N-1
    # (all-upgraded) the most reliable.
    z = bhattacharyya_parameters(6, 2.0, rate=0.5)
    assert z[0] == z.max()
    assert z[-1] == z.min()


def test_bhattacharyya_recursive_oracle():
    # Recompute z for every index by applying the per-bit recurrence to the
    # index's binary expansion, MSB first.
    n, snr, rate = 5, 1.5, 0.75
    z = bhattacharyya_parameters(n, snr, rate)
    z0 = np.exp(-rate * 10 ** (snr / 10))
    for idx in range(1 << n):
        v = z0
        for b in range(n - 1, -1, -1):
            v = v * v if (idx >> b) & 1 else 2 * v - v * v
        assert z[idx] == pytest.approx(v, rel=1e-12)


def test_construct_frozen_set_freezes_least_reliable():
    n, K = 3, 4
    fs = construct_frozen_set(n, K)
    assert fs == {0, 1, 2, 4}  # the classic worst channels of N=8
    assert 7 not in fs


def test_construct_frozen_set_deterministic_and_sized():
    for K in (100, 512, 900):
        a = construct_frozen_set(10, K)
        b = construct_frozen_set(10, K)
        assert a == b
        assert len(a) == 1024 - K


def test_construct_tie_break_prefers_freezing_smaller_index():
    # At very high design SNR many z values underflow to exactly 0.0; the
    # tie-break must still deterministically freeze the smallest indices
    # among the tied group.
    z = bhattacharyya_parameters(4, 100.0, rate=0.5)
    assert np.all(z == 0.0)  # everything tied
    fs = construct_frozen_set(4, 8, design_snr_db=100.0)
    assert fs == set(range(8))


# ---------------------------------------------------------------------------
# frozen-set files

def test_load_frozen_set_roundtrip(tmp_path):
    fs = construct_frozen_set(6, 40)
    p = tmp_path / "frozen.txt"
    p.write_text("# design SNR 2 dB\n" +
                 "\n".join(str(i) for i in sorted(fs)) + "\n\n")
    assert load_frozen_set(p, 64) == fs


def test_load_frozen_set_inline_comments(tmp_path):
    p = tmp_path / "f.txt"
    p.write_text("0  # worst channel\n1\n2\n")
    assert load_frozen_set(p, 8) == {0, 1, 2}


@pytest.mark.parametrize("content,msg", [
    ("0\nx\n", "not an integer"),
    ("0\n8\n", "out of range"),
    ("0\n1\n0\n", "duplicate"),
])
def test_load_frozen_set_errors_carry_line_numbers(tmp_path, content, msg):
    p = tmp_path / "bad.txt"
    p.write_text(content)
    with pytest.raises(FrozenSetFormatError, match=msg) as exc:
        load_frozen_set(p, 8)
    assert exc.value.line is not None


# ---------------------------------------------------------------------------
# CRC

@given(st.lists(st.integers(0, 1), min_size=0, max_size=64),
       st.integers(1, (1 << 16) - 1))
def test_crc_matches_long_division_oracle(bits, poly):
    r = max(poly.bit_length(), 1)
    got = crc_compute(np.array(bits, dtype=np.int8), poly, r)
    want = crc_longdiv(bits, poly, r)
    assert np.array_equal(got, want)


def test_crc_known_vector():
    # CRC-16/CCITT of the 72-bit ASCII "123456789" with zero init is 0x31C3.
    msg = np.unpackbits(np.frombuffer(b"123456789", dtype=np.uint8))
    crc = crc_compute(msg, CRC16_CCITT, 16)
    assert int("".join(map(str, crc)), 2) == 0x31C3


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40),
       st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_crc_is_linear(a, b):
    n = max(len(a), len(b))
    a = np.array([0] * (n - len(a)) + a, dtype=np.int8)
    b = np.array([0] * (n - len(b)) + b, dtype=np.int8)
    ca = crc_compute(a, 0x1021, 16)
    cb = crc_compute(b, 0x1021, 16)
    assert np.array_equal(crc_compute(a ^ b, 0x1021, 16), ca ^ cb)


@given(st.lists(st.integers(0, 1), min_size=0, max_size=48))
def test_crc_check_accepts_own_tail_and_rejects_flip(bits):
    bits = np.array(bits, dtype=np.int8)
    word = np.concatenate([bits, crc_compute(bits, 0x07, 8)])
    assert crc_check(word, 0x07, 8)
    flipped = word.copy()
    flipped[0] ^= 1 if flipped.size else 0
    if flipped.size:
        assert not crc_check(flipped, 0x07, 8)


def test_crc_check_short_input_fails():
    assert not crc_check(np.array([1, 0, 1]), 0x1021, 16)


# ---------------------------------------------------------------------------
# encoding

@pytest.mark.parametrize("n", [1, 2, 3, 5, 7])
def test_encode_matches_dense_generator(n):
    rng = np.random.default_rng(n)
    G = dense_generator(n)
    for _ in range(20):
        u = rng.integers(0, 2, 1 << n).astype(np.int8)
        assert np.array_equal(encode(u), (u @ G) % 2)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=60)
def test_encode_is_an_involution(n, seed):
    u = np.random.default_rng(seed).integers(0, 2, 1 << n).astype(np.int8)
    assert np.array_equal(encode(encode(u)), u)


def test_encode_rejects_non_power_of_two():
    with pytest.raises(ValueError):
        encode(np.zeros(6, dtype=np.int8))
    with pytest.raises(ValueError):
        encode(np.zeros(0, dtype=np.int8))


def test_encode_length_checked_against_code(small_code):
    with pytest.raises(ValueError):
        encode(np.zeros(16, dtype=np.int8), small_code)


# ---------------------------------------------------------------------------
# source-word assembly

def test_assemble_and_extract_roundtrip(small_code):
    rng = np.random.default_rng(0)
    for _ in range(25):
        info = rng.integers(0, 2, small_code.info_bit_count)
        u = assemble_source_word(info, small_code)
        assert u[sorted(small_code.frozen_set)].sum() == 0
        assert np.array_equal(extract_payload(u, small_code), info)
        assert source_word_passes_crc(u, small_code)


def test_assemble_rejects_wrong_length(small_code):
    with pytest.raises(ValueError):
        assemble_source_word(np.zeros(3, dtype=np.int8), small_code)


def test_crc_disabled_code_always_passes():
    code = PolarCode(n=3, K=4, r=0, frozen_set=frozenset({0, 1, 2, 4}))
    u = assemble_source_word(np.array([1, 0, 1, 1]), code)
    assert source_word_passes_crc(u, code)


def test_count_frozen_siblings():
    code = PolarCode(n=3, K=4, r=0, frozen_set=frozenset({0, 1, 2, 4}))
    # pairs: (0,1) both frozen; (2,3) no; (4,5) no; (6,7) no
    assert count_frozen_siblings(code) == 1
