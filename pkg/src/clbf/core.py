"""Bloom-filter primitives, keyed index derivation and per-hop CLBF embedding.

All bit positions are 1-based at the interface (``1..m``).  Internally a filter
is a Python ``int`` whose bit ``i - 1`` stores position ``i``.
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

from .segments import DomainError

EDGE_TAG = b"EDGE"
SEG_TAG = b"SEG"
EID_TAG = b"EID"
EID_BYTES = 16
PID_BYTES = 8


def _field(b: bytes) -> bytes:
    # length-prefixed so concatenations stay unambiguous
    return struct.pack(">H", len(b)) + b


def hash_indices(domain_tag: bytes, material: bytes, k: int, m: int) -> list[int]:
    """Derive ``k`` indices in ``[1, m]`` from ``material``.

    Index ``l`` is the BLAKE2b digest of ``material || l`` personalised with
    ``domain_tag``, reduced modulo ``m``.  Duplicates are allowed.
    """
    if k < 1 or m < 1:
        raise DomainError(f"need k >= 1 and m >= 1, got k={k}, m={m}")
    base = hashlib.blake2b(material, digest_size=8, person=domain_tag)
    out = []
    for l in range(1, k + 1):
        h = base.copy()
        h.update(l.to_bytes(4, "big"))
        out.append(int.from_bytes(h.digest(), "big") % m + 1)
    return out


@dataclass
class BloomFilter:
    m: int
    k: int
    bits: int = 0

    def __post_init__(self):
        if self.m < 1 or not 1 <= self.k <= self.m:
            raise DomainError(f"need 1 <= k <= m, got k={self.k}, m={self.m}")
        if self.bits >> self.m:
            raise DomainError("bit pattern wider than the filter")

    def copy(self) -> "BloomFilter":
        return BloomFilter(self.m, self.k, self.bits)

    def _mask(self, indices) -> int:
        mask = 0
        for i in indices:
            if not 1 <= i <= self.m:
                raise DomainError(f"index {i} outside [1, {self.m}]")
            mask |= 1 << (i - 1)
        return mask

    def set_indices(self, indices) -> None:
        self.bits |= self._mask(indices)

    def query(self, indices) -> bool:
        mask = self._mask(indices)
        return self.bits & mask == mask

    def popcount(self) -> int:
        return bin(self.bits).count("1")

    def is_set(self, i: int) -> bool:
        return bool(self.bits >> (i - 1) & 1)

    def to_bitlist(self) -> list[int]:
        return [(self.bits >> i) & 1 for i in range(self.m)]

    @classmethod
    def from_bitlist(cls, bits, k: int = 1) -> "BloomFilter":
        value = 0
        for i, b in enumerate(bits):
            if b:
                value |= 1 << i
        return cls(len(bits), k, value)

    def to_bytes(self) -> bytes:
        """Position 1 is the most significant bit of the first byte."""
        out = bytearray((self.m + 7) // 8)
        for i in range(self.m):
            if self.bits >> i & 1:
                out[i // 8] |= 0x80 >> (i % 8)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, m: int, k: int = 1) -> "BloomFilter":
        if len(data) != (m + 7) // 8:
            raise DomainError("byte length does not match m")
        value = 0
        for i in range(m):
            if data[i // 8] & (0x80 >> (i % 8)):
                value |= 1 << i
        return cls(m, k, value)


def query(bf: BloomFilter, indices) -> bool:
    """True iff every index is set in ``bf``."""
    return bf.query(indices)


@dataclass(frozen=True)
class NodeCredentials:
    node_id: bytes
    key: bytes


@dataclass(frozen=True)
class EdgeId:
    value: bytes
    from_node: bytes
    to_node: bytes


def derive_edge_id(creds: NodeCredentials, self_id: bytes, neighbor_id: bytes) -> EdgeId:
    """Keyed PRF of ``self_id || neighbor_id`` under the node's key.

    ``from_node``/``to_node`` record the derivation order (self, neighbor), not
    the direction of travel.
    """
    if self_id != creds.node_id:
        raise DomainError("edge ids are derived with the deriving node's own credentials")
    if self_id == neighbor_id:
        raise DomainError("self-loop edge")
    digest = hashlib.blake2b(
        _field(self_id) + _field(neighbor_id),
        digest_size=EID_BYTES,
        key=creds.key,
        person=EID_TAG,
    ).digest()
    return EdgeId(digest, self_id, neighbor_id)


def segment_material(creds: NodeCredentials, segment: int, pid: bytes) -> bytes:
    return _field(creds.node_id) + segment.to_bytes(2, "big") + _field(pid) + _field(creds.key)


def edge_material(eid: EdgeId, pid: bytes) -> bytes:
    return _field(eid.value) + _field(pid)


def segment_indices(creds: NodeCredentials, segment: int, pid: bytes, k2: int, m2: int) -> list[int]:
    return hash_indices(SEG_TAG, segment_material(creds, segment, pid), k2, m2)


def edge_indices(eid: EdgeId, pid: bytes, k1: int, m1: int) -> list[int]:
    return hash_indices(EDGE_TAG, edge_material(eid, pid), k1, m1)


@dataclass
class ClbfPacket:
    pid: bytes
    bf1: BloomFilter
    bf2: BloomFilter
    hop_counter: int = 0
    payload: bytes = b""
    # abstract cost counters: hash calls and keyed-primitive calls
    cost: dict = field(default_factory=lambda: {"hash": 0, "prf": 0}, compare=False)

    @classmethod
    def new(cls, pid: bytes, m1: int, k1: int, m2: int, k2: int, payload: bytes = b"") -> "ClbfPacket":
        return cls(pid, BloomFilter(m1, k1), BloomFilter(m2, k2), 0, payload)

    def to_bytes(self) -> bytes:
        """Wire layout: pid(8) hop(1) m1(2) BF1 m2(2) BF2 len(2) payload."""
        if len(self.pid) != PID_BYTES:
            raise DomainError(f"pid must be {PID_BYTES} bytes on the wire")
        if not 0 <= self.hop_counter <= 255:
            raise DomainError("hop counter does not fit one byte")
        return b"".join(
            [
                self.pid,
                bytes([self.hop_counter]),
                struct.pack(">H", self.bf1.m),
                self.bf1.to_bytes(),
                struct.pack(">H", self.bf2.m),
                self.bf2.to_bytes(),
                struct.pack(">H", len(self.payload)),
                self.payload,
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes, k1: int = 1, k2: int = 1) -> "ClbfPacket":
        try:
            pid = data[:PID_BYTES]
            hop = data[PID_BYTES]
            pos = PID_BYTES + 1
            (m1,) = struct.unpack_from(">H", data, pos)
            pos += 2
            n1 = (m1 + 7) // 8
            bf1 = BloomFilter.from_bytes(data[pos : pos + n1], m1, min(k1, m1))
            pos += n1
            (m2,) = struct.unpack_from(">H", data, pos)
            pos += 2
            n2 = (m2 + 7) // 8
            bf2 = BloomFilter.from_bytes(data[pos : pos + n2], m2, min(k2, m2))
            pos += n2
            (plen,) = struct.unpack_from(">H", data, pos)
            pos += 2
        except (IndexError, struct.error) as exc:
            raise DomainError("truncated packet") from exc
        payload = data[pos : pos + plen]
        if len(payload) != plen or pos + plen != len(data):
            raise DomainError("payload length mismatch")
        return cls(pid, bf1, bf2, hop, payload)


def embed_segment(pkt: ClbfPacket, creds: NodeCredentials, segment: int, k2: int) -> ClbfPacket:
    if segment < 1:
        raise DomainError("segments are 1-based")
    pkt.bf2.set_indices(segment_indices(creds, segment, pkt.pid, k2, pkt.bf2.m))
    pkt.cost["hash"] += k2
    return pkt


def embed_edge(pkt: ClbfPacket, eid: EdgeId, k1: int) -> ClbfPacket:
    pkt.bf1.set_indices(edge_indices(eid, pkt.pid, k1, pkt.bf1.m))
    pkt.cost["hash"] += k1
    return pkt


def forward_step(
    pkt: ClbfPacket,
    creds: NodeCredentials,
    prev_node_id: bytes | None,
    segment: int,
    k1: int,
    k2: int,
    next_hop_rsu: bytes | None = None,
) -> ClbfPacket:
    """Run one node's embedding: incoming edge, own segment, counter.

    ``prev_node_id`` is ``None`` at the source, which leaves BF1 untouched.
    When ``next_hop_rsu`` is given the node is the RSU-adjacent forwarder and
    also embeds its outgoing edge to the RSU, since the RSU never embeds.
    """
    if prev_node_id is not None:
        embed_edge(pkt, derive_edge_id(creds, creds.node_id, prev_node_id), k1)
        pkt.cost["prf"] += 1
    embed_segment(pkt, creds, segment, k2)
    if next_hop_rsu is not None:
        embed_edge(pkt, derive_edge_id(creds, creds.node_id, next_hop_rsu), k1)
        pkt.cost["prf"] += 1
    pkt.hop_counter += 1
    return pkt


def optimal_k1(m1: int, edge_count: int) -> int:
    """Standard Bloom sizing rule ``round(m/n * ln 2)`` clamped to ``[1, m1]``."""
    if edge_count < 1 or m1 < 1:
        raise DomainError("need m1 >= 1 and edge_count >= 1")
    return max(1, min(m1, round(m1 / edge_count * math.log(2))))


def bloom_size_for_rate(n: int, p: float) -> int:
    """Bits needed for ``n`` insertions at per-query false-positive rate ``p``."""
    if n < 1 or not 0 < p < 1:
        raise DomainError("need n >= 1 and 0 < p < 1")
    return math.ceil(-n * math.log(p) / math.log(2) ** 2)
