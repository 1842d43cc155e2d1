"""Segment-level localisation of a single-segment jammer from reachability."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..segments import RSU_SEGMENT, DomainError, _check_params


@dataclass(frozen=True)
class Topology:
    """Vehicles on a road covered by ``r`` segments; two nodes talk iff their
    segments differ by at most ``beta``."""

    r: int
    beta: int
    node_segments: tuple[int, ...]

    def __post_init__(self):
        _check_params(self.beta, self.r)
        if set(self.node_segments) != set(range(1, self.r + 1)):
            raise DomainError("every segment must hold at least one node")

    @classmethod
    def spread(cls, r: int, beta: int = 1, n_nodes: int = 23, seed: int = 0) -> "Topology":
        """One node per segment plus the rest placed uniformly at random."""
        if n_nodes < r:
            raise DomainError("need at least one node per segment")
        rng = np.random.default_rng(seed)
        extra = rng.integers(1, r + 1, n_nodes - r)
        return cls(r, beta, tuple(sorted([*range(1, r + 1), *map(int, extra)])))


@dataclass(frozen=True)
class JammerVerdict:
    kind: str  # "none", "beyond" or "exact"
    segments: tuple[int, ...] = ()
    last_reachable: int = 0

    @property
    def text(self) -> str:
        if self.kind == "none":
            return "none"
        if self.kind == "beyond":
            return f"beyond A{self.last_reachable}"
        lo, hi = self.segments[0], self.segments[-1]
        return f"A{lo}" if lo == hi else f"A{lo}-A{hi}"

    def __str__(self) -> str:
        return self.text


def unreachable_segments(topology: Topology, jammed: int | None, rsu_segment: int) -> set[int]:
    """Segments holding at least one node the RSU cannot hear from."""
    segs = topology.node_segments
    alive = [i for i, s in enumerate(segs) if s != jammed]
    seen = set()
    queue = deque(i for i in alive if abs(segs[i] - rsu_segment) <= topology.beta)
    seen.update(queue)
    while queue:
        i = queue.popleft()
        for j in alive:
            if j not in seen and abs(segs[j] - segs[i]) <= topology.beta:
                seen.add(j)
                queue.append(j)
    return {segs[i] for i in range(len(segs)) if i not in seen}


def jammer_scenario(topology: Topology, jammed_segment: int | None, dual_rsu: bool = False) -> JammerVerdict:
    """Localise the jammer from which segments fall silent.

    With one RSU in segment 1 the fault can only be placed beyond the last
    segment still heard.  A second RSU at segment ``r`` on the opposite side
    sees the mirror image; intersecting both silent sets pins the segment.
    """
    r = topology.r
    if jammed_segment is not None:
        if jammed_segment == RSU_SEGMENT:
            raise DomainError("a jammer in the RSU segment is not a supported configuration")
        lo = 2
        hi = r - 1 if dual_rsu else r
        if not lo <= jammed_segment <= hi:
            raise DomainError(f"jammed segment must lie in [{lo}, {hi}]")
    left = unreachable_segments(topology, jammed_segment, RSU_SEGMENT)
    if not dual_rsu:
        if not left:
            return JammerVerdict("none")
        return JammerVerdict("beyond", tuple(sorted(left)), min(left) - 1)
    right = unreachable_segments(topology, jammed_segment, r)
    both = left & right
    if not both:
        return JammerVerdict("none")
    return JammerVerdict("exact", tuple(sorted(both)))
