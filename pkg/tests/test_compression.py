import time

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clbf.compression import (
    HEADER_BYTES,
    RAKE_BASE,
    RAW,
    ZERO_RUN,
    CompressedBits,
    DecodeError,
    compress,
    decompress,
)

bitlists = st.lists(st.integers(0, 1), max_size=600)
schemes = st.sampled_from(["auto", "rake", "zero-run", "raw"])


@given(bitlists, schemes, st.integers(1, 7))
def test_roundtrip_every_scheme(bits, scheme, e):
    c = compress(bits, scheme, rake_exp=e)
    assert decompress(c) == bits
    assert decompress(CompressedBits.from_bytes(c.to_bytes())) == bits


@given(bitlists)
def test_auto_never_expands_body(bits):
    c = compress(bits)
    assert c.body_bits <= len(bits)
    assert c.wire_bytes <= HEADER_BYTES + (len(bits) + 7) // 8


def test_all_zero_is_tiny():
    c = compress([0] * 100)
    assert len(c.body) <= 3
    assert c.scheme in (RAKE_BASE + 2, ZERO_RUN)


def test_dense_falls_back_to_raw():
    rng = np.random.default_rng(1)
    bits = (rng.random(100) < 0.6).astype(int).tolist()
    c = compress(bits)
    assert c.scheme == RAW and c.body_bits == 100
    assert c.wire_bytes == HEADER_BYTES + 13


def test_sparse_input_shrinks():
    rng = np.random.default_rng(2)
    for _ in range(200):
        bits = (rng.random(200) < 0.25).astype(int).tolist()
        assert compress(bits).body_bits <= 200


def test_rake_encoding_is_bit_exact():
    # window of four: "0001" -> 1 + offset 3; "0000" -> 0; trailing "01" -> 1 + offset 1
    bits = [0, 0, 0, 1, 0, 0, 0, 0, 0, 1]
    c = compress(bits, "rake")
    assert c.scheme == 0x12 and c.body_bits == 3 + 1 + 3
    assert c.to_bytes() == bytes([0x12, 0x00, 0x0A, 0b11101010])


def test_zero_run_encoding_is_bit_exact():
    # runs 2 then 0 trailing: gamma(3)=011, gamma(1)=1
    c = compress([0, 0, 1], "zero-run")
    assert c.body_bits == 4
    assert c.to_bytes() == bytes([0x20, 0x00, 0x03, 0b01110000])


def test_decode_errors():
    c = compress([0, 1] * 40, "rake")
    with pytest.raises(DecodeError):
        decompress(CompressedBits(c.scheme, c.body[:-2], c.original_length, 0))
    with pytest.raises(DecodeError):
        decompress(CompressedBits(0x7F, b"", 0, 0))
    with pytest.raises(DecodeError):
        CompressedBits.from_bytes(b"\x00")
    with pytest.raises(DecodeError):
        decompress(CompressedBits(RAW, b"\x01", 4, 8))


def test_size_non_increasing_with_sparsity():
    rng = np.random.default_rng(3)
    means = []
    for density in (0.4, 0.3, 0.2, 0.1, 0.05):
        sizes = [compress((rng.random(128) < density).astype(int).tolist()).body_bits for _ in range(1000)]
        means.append(np.mean(sizes))
    assert all(a >= b for a, b in zip(means, means[1:]))


def test_table_sizes_roundtrip():
    rng = np.random.default_rng(4)
    for m in (100, 125, 150):
        bits = (rng.random(m) < 0.2).astype(int).tolist()
        assert decompress(compress(bits)) == bits


def test_cost_grows_at_most_linearly():
    rng = np.random.default_rng(5)

    def cost(m):
        data = [(rng.random(m) < 0.2).astype(int).tolist() for _ in range(50)]
        t = time.perf_counter()
        for bits in data:
            decompress(compress(bits))
        return time.perf_counter() - t

    small, large = min(cost(256) for _ in range(3)), min(cost(2048) for _ in range(3))
    # eight times the input: allow generous slack over linear for timer noise
    assert large < 8 * small * 2.5


def test_length_limits():
    with pytest.raises(ValueError):
        compress([0] * 70_000)
    with pytest.raises(ValueError):
        compress([0], "lz")
