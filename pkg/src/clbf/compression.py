"""Lossless compression of sparse provenance bit arrays.

Encoding (bit-exact, shared by every scheme)::

    byte 0      scheme tag
    bytes 1-2   original length in bits, big-endian
    body        coded bit stream, MSB first, zero-padded to a byte boundary

Scheme tags:

``0x00`` raw
    The input bits verbatim.
``0x10 + e`` RAKE with rake length ``D = 2**e`` (``1 <= e <= 7``)
    Scan a window of ``D`` bits.  If it holds no one, emit ``0`` and advance
    ``D`` bits (a final short window counts as a full one).  Otherwise emit
    ``1`` followed by the offset ``i`` of the first one in ``e`` bits and
    advance ``i + 1`` bits.
``0x20`` zero-run
    For every one, the Elias-gamma code of (zeros before it + 1); then the
    gamma code of (trailing zeros + 1).

``compress`` in ``auto`` mode keeps the shortest of RAKE-4, zero-run and raw,
so the body never exceeds the input length.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Sequence

RAW = 0x00
RAKE_BASE = 0x10
ZERO_RUN = 0x20
DEFAULT_RAKE_EXP = 2  # rake length 4
HEADER_BYTES = 3
MAX_BITS = 0xFFFF


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class CompressedBits:
    scheme: int
    body: bytes
    original_length: int
    body_bits: int  # coded stream length before byte padding

    def to_bytes(self) -> bytes:
        return bytes([self.scheme]) + struct.pack(">H", self.original_length) + self.body

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompressedBits":
        if len(data) < HEADER_BYTES:
            raise DecodeError("missing header")
        (n,) = struct.unpack_from(">H", data, 1)
        # body_bits is not on the wire; decoding recovers the real stream end
        return cls(data[0], bytes(data[HEADER_BYTES:]), n, 8 * (len(data) - HEADER_BYTES))

    @property
    def wire_bytes(self) -> int:
        return HEADER_BYTES + len(self.body)


class _Writer:
    def __init__(self):
        self.bits: list[int] = []

    def write(self, value: int, width: int) -> None:
        for s in range(width - 1, -1, -1):
            self.bits.append(value >> s & 1)

    def gamma(self, v: int) -> None:
        nb = v.bit_length()
        self.bits.extend([0] * (nb - 1))
        self.write(v, nb)

    def getvalue(self) -> tuple[bytes, int]:
        n = len(self.bits)
        padded = self.bits + [0] * (-n % 8)
        out = bytearray()
        for i in range(0, len(padded), 8):
            byte = 0
            for b in padded[i : i + 8]:
                byte = byte << 1 | b
            out.append(byte)
        return bytes(out), n


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0
        self.limit = 8 * len(data)

    def bit(self) -> int:
        if self.pos >= self.limit:
            raise DecodeError("truncated body")
        b = self.data[self.pos >> 3] >> (7 - (self.pos & 7)) & 1
        self.pos += 1
        return b

    def read(self, width: int) -> int:
        v = 0
        for _ in range(width):
            v = v << 1 | self.bit()
        return v

    def gamma(self) -> int:
        zeros = 0
        while self.bit() == 0:
            zeros += 1
            if zeros > 16:
                raise DecodeError("malformed gamma code")
        return (1 << zeros) | self.read(zeros)

    def finish(self) -> None:
        if self.limit - self.pos >= 8:
            raise DecodeError("trailing bytes after body")
        while self.pos < self.limit:
            if self.bit():
                raise DecodeError("non-zero padding")


def _encode_raw(bits: Sequence[int]) -> _Writer:
    w = _Writer()
    w.bits = list(bits)
    return w


def _encode_rake(bits: Sequence[int], e: int) -> _Writer:
    D = 1 << e
    n = len(bits)
    w = _Writer()
    pos = 0
    while pos < n:
        end = min(pos + D, n)
        for i in range(pos, end):
            if bits[i]:
                w.bits.append(1)
                w.write(i - pos, e)
                pos = i + 1
                break
        else:
            w.bits.append(0)
            pos += D
    return w


def _encode_zero_run(bits: Sequence[int]) -> _Writer:
    w = _Writer()
    run = 0
    for b in bits:
        if b:
            w.gamma(run + 1)
            run = 0
        else:
            run += 1
    w.gamma(run + 1)
    return w


def _decode_rake(rd: _Reader, n: int, e: int) -> list[int]:
    D = 1 << e
    out: list[int] = []
    while len(out) < n:
        if rd.bit() == 0:
            out.extend([0] * min(D, n - len(out)))
        else:
            i = rd.read(e)
            if len(out) + i + 1 > n:
                raise DecodeError("run overflows original length")
            out.extend([0] * i)
            out.append(1)
    return out


def _decode_zero_run(rd: _Reader, n: int) -> list[int]:
    out: list[int] = []
    while True:
        zeros = rd.gamma() - 1
        if len(out) + zeros == n:
            out.extend([0] * zeros)
            return out
        if len(out) + zeros + 1 > n:
            raise DecodeError("run overflows original length")
        out.extend([0] * zeros)
        out.append(1)


def _pack(scheme: int, n: int, w: _Writer) -> CompressedBits:
    body, nbits = w.getvalue()
    return CompressedBits(scheme, body, n, nbits)


def compress(bits: Iterable[int], scheme: str = "auto", rake_exp: int = DEFAULT_RAKE_EXP) -> CompressedBits:
    """Encode a bit sequence; ``scheme`` is ``auto``, ``rake``, ``zero-run`` or ``raw``."""
    bits = [1 if b else 0 for b in bits]
    n = len(bits)
    if n > MAX_BITS:
        raise ValueError(f"at most {MAX_BITS} bits fit the length field")
    if not 1 <= rake_exp <= 7:
        raise ValueError("rake exponent must lie in [1, 7]")
    if scheme == "raw":
        return _pack(RAW, n, _encode_raw(bits))
    if scheme == "rake":
        return _pack(RAKE_BASE + rake_exp, n, _encode_rake(bits, rake_exp))
    if scheme == "zero-run":
        return _pack(ZERO_RUN, n, _encode_zero_run(bits))
    if scheme != "auto":
        raise ValueError(f"unknown scheme {scheme!r}")
    options = [
        (RAKE_BASE + rake_exp, _encode_rake(bits, rake_exp)),
        (ZERO_RUN, _encode_zero_run(bits)),
        (RAW, _encode_raw(bits)),
    ]
    # ties prefer the earlier entry
    tag, w = min(options, key=lambda o: len(o[1].bits))
    return _pack(tag, n, w)


def decompress(c: CompressedBits) -> list[int]:
    n = c.original_length
    rd = _Reader(c.body)
    if c.scheme == RAW:
        out = [rd.bit() for _ in range(n)]
    elif RAKE_BASE + 1 <= c.scheme <= RAKE_BASE + 7:
        out = _decode_rake(rd, n, c.scheme - RAKE_BASE)
    elif c.scheme == ZERO_RUN:
        out = _decode_zero_run(rd, n)
    else:
        raise DecodeError(f"unknown scheme tag {c.scheme:#x}")
    rd.finish()
    return out


def codec_cost(c: CompressedBits) -> int:
    """Abstract cost of one compress + decompress: original plus coded bits."""
    return c.original_length + c.body_bits
