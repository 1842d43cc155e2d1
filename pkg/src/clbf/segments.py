"""Segmented coverage area, node-to-segment maps and valid segment sequences.

Sequences are stored non-decreasing from the RSU outward: ``values[0]`` is the
segment of the node closest to the RSU (the last forwarder) and ``values[-1]``
is the source's segment.  The RSU itself sits in segment 1 and acts as the
implicit root of every sequence; it is never part of ``values``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

RSU_SEGMENT = 1


class DomainError(ValueError):
    """A parameter lies outside the domain of an operation."""


class OutOfCoverageError(DomainError):
    """A position does not fall inside the RSU coverage area."""


def _check_params(beta: int, r: int) -> None:
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    if not 1 <= beta <= r:
        raise DomainError(f"beta must satisfy 1 <= beta <= r, got beta={beta}, r={r}")


@dataclass(frozen=True)
class SegmentSpace:
    r: int
    segment_length_m: float
    beta: int
    rsu_segment: int = RSU_SEGMENT

    def __post_init__(self):
        _check_params(self.beta, self.r)
        if not self.segment_length_m > 0:
            raise DomainError("segment_length_m must be positive")
        if self.rsu_segment != RSU_SEGMENT:
            raise DomainError("the RSU is always in segment 1")

    @property
    def coverage_m(self) -> float:
        return self.r * self.segment_length_m

    def dictionary(self, version: int = 0) -> "SegmentDictionary":
        return SegmentDictionary.uniform(self.r, self.segment_length_m, version)


@dataclass(frozen=True)
class SegmentDictionary:
    """Position intervals ``[lo, hi)`` in meters, entry ``i`` is segment ``i + 1``."""

    boundaries: tuple[tuple[float, float], ...]
    version: int = 0

    def __post_init__(self):
        if not self.boundaries:
            raise DomainError("dictionary needs at least one segment")
        if self.boundaries[0][0] != 0:
            raise DomainError("segment 1 must start at position 0")
        prev_hi = 0.0
        for lo, hi in self.boundaries:
            if lo != prev_hi or not hi > lo:
                raise DomainError("segment intervals must be contiguous and non-empty")
            prev_hi = hi

    @classmethod
    def uniform(cls, r: int, segment_length_m: float, version: int = 0) -> "SegmentDictionary":
        bounds = tuple((i * segment_length_m, (i + 1) * segment_length_m) for i in range(r))
        return cls(bounds, version)

    @property
    def r(self) -> int:
        return len(self.boundaries)

    @property
    def coverage_m(self) -> float:
        return self.boundaries[-1][1]

    def to_text(self) -> str:
        lo0, hi0 = self.boundaries[0]
        lines = [f"r={self.r} seg_len={hi0 - lo0!r}"]
        for i, (lo, hi) in enumerate(self.boundaries, start=1):
            lines.append(f"{i} {lo!r} {hi!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, version: int = 0) -> "SegmentDictionary":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if not rows:
            raise DomainError("empty dictionary text")
        header = dict(tok.split("=", 1) for tok in rows[0])
        try:
            r = int(header["r"])
            float(header["seg_len"])
        except (KeyError, ValueError) as exc:
            raise DomainError(f"bad dictionary header: {rows[0]}") from exc
        version = int(header.get("version", version))
        body = rows[1:]
        if len(body) != r:
            raise DomainError(f"header announces {r} segments, found {len(body)} lines")
        bounds = []
        for expected, row in enumerate(body, start=1):
            if len(row) != 3 or int(row[0]) != expected:
                raise DomainError(f"bad dictionary line: {' '.join(row)}")
            bounds.append((float(row[1]), float(row[2])))
        return cls(tuple(bounds), version)


def segment_of(position_m: float, dictionary: SegmentDictionary) -> int:
    """Return the 1-based segment whose interval contains ``position_m``."""
    if not 0 <= position_m < dictionary.coverage_m:
        raise OutOfCoverageError(
            f"position {position_m} m outside coverage [0, {dictionary.coverage_m})"
        )
    lo_edges = [lo for lo, _ in dictionary.boundaries]
    return bisect.bisect_right(lo_edges, position_m)


@dataclass(frozen=True)
class SpatialMap:
    """The node -> segment assignment ``g``, fixed for one packet's lifetime."""

    assignment: Mapping[bytes, int] = field(default_factory=dict)
    epoch: int = 0

    def __getitem__(self, node_id: bytes) -> int:
        return self.assignment[node_id]

    def validate(self, r: int) -> None:
        for node, seg in self.assignment.items():
            if not 1 <= seg <= r:
                raise DomainError(f"node {node!r} mapped to segment {seg} outside [1, {r}]")


def validate_sequence(seq: Sequence[int], beta: int, r: int) -> bool:
    """True iff ``seq`` is a valid segment sequence (RSU-side first).

    Raises :class:`DomainError` for an empty sequence or entries outside [1, r].
    """
    _check_params(beta, r)
    if len(seq) == 0:
        raise DomainError("sequence must be non-empty")
    for v in seq:
        if not 1 <= v <= r:
            raise DomainError(f"segment {v} outside [1, {r}]")
    prev = RSU_SEGMENT
    for v in seq:
        if not 0 <= v - prev <= beta:
            return False
        prev = v
    return True


def strip_root(rooted: Sequence[int]) -> tuple[int, ...]:
    """Drop the leading RSU entry from a sequence written with its root.

    Worked examples in the literature often list the RSU segment ``A1`` as the
    first element, e.g. ``(1, 3, 5)`` for a 2-hop path.
    """
    if not rooted or rooted[0] != RSU_SEGMENT:
        raise DomainError("rooted sequence must start with the RSU segment 1")
    return tuple(rooted[1:])


def iter_valid_sequences(L: int, beta: int, r: int) -> Iterator[tuple[int, ...]]:
    """Depth-first generation of every valid sequence of length ``L``.

    Emits sequences in lexicographic order while holding only O(L) state.
    """
    _check_params(beta, r)
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    seq = [0] * L
    # explicit stack of (depth, next candidate value, upper bound)
    stack = [(0, RSU_SEGMENT, min(RSU_SEGMENT + beta, r))]
    while stack:
        depth, value, hi = stack.pop()
        if value > hi:
            continue
        stack.append((depth, value + 1, hi))
        seq[depth] = value
        if depth == L - 1:
            yield tuple(seq)
        else:
            stack.append((depth + 1, value, min(value + beta, r)))


def enumerate_valid_sequences(L: int, beta: int, r: int) -> list[tuple[int, ...]]:
    return list(iter_valid_sequences(L, beta, r))


def count_valid_sequences(L: int, beta: int, r: int) -> int:
    """|P_beta| by dynamic programming over the last value (no enumeration)."""
    _check_params(beta, r)
    if L < 1:
        raise DomainError(f"L must be >= 1, got {L}")
    ways = [0] * (r + 1)
    for v in range(RSU_SEGMENT, min(RSU_SEGMENT + beta, r) + 1):
        ways[v] = 1
    for _ in range(L - 1):
        nxt = [0] * (r + 1)
        for v in range(1, r + 1):
            nxt[v] = sum(ways[max(1, v - beta) : v + 1])
        ways = nxt
    return sum(ways)


@dataclass(frozen=True)
class PrivacyBits:
    rsu_resolved: float
    rsu_residual: float
    eavesdropper: float


def privacy_bits(M: int, r: int, beta: int, hop_gap: int | None = None) -> PrivacyBits:
    """Location uncertainty, in bits, left to the RSU and to observers.

    ``hop_gap=None`` models an external eavesdropper adjacent to the link (the
    packet may arrive from either direction).  A positive ``hop_gap`` models a
    forwarder that many hops away from the vehicle on the same path.
    """
    if r < 1 or M < r:
        raise DomainError(f"need M >= r >= 1, got M={M}, r={r}")
    if beta < 1:
        raise DomainError("beta must be >= 1")
    cells = M / r
    if hop_gap is None:
        spread = 2 * beta
    else:
        if hop_gap < 1:
            raise DomainError("hop_gap must be >= 1")
        spread = hop_gap * beta
    return PrivacyBits(
        rsu_resolved=math.log2(r),
        rsu_residual=math.log2(cells),
        eavesdropper=math.log2(spread * cells),
    )
