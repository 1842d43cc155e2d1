"""RSU-side reconstruction of path and per-node segments from a CLBF packet."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .core import (
    BloomFilter,
    ClbfPacket,
    EdgeId,
    NodeCredentials,
    derive_edge_id,
    edge_indices,
    segment_indices,
)
from .segments import RSU_SEGMENT, DomainError


class InconsistentProvenanceError(RuntimeError):
    """No candidate survives the routing and communication constraints."""


@dataclass
class KeyStore:
    rsu_id: bytes
    nodes: dict[bytes, NodeCredentials] = field(default_factory=dict)

    @classmethod
    def from_credentials(cls, rsu_id: bytes, creds: Iterable[NodeCredentials]) -> "KeyStore":
        return cls(rsu_id, {c.node_id: c for c in creds})

    def __getitem__(self, node_id: bytes) -> NodeCredentials:
        return self.nodes[node_id]

    def all_edges(self) -> list[EdgeId]:
        """Every edge id the RSU can derive: vehicle -> vehicle and vehicle -> RSU."""
        ids = list(self.nodes)
        out = []
        for i in ids:
            creds = self.nodes[i]
            for j in ids + [self.rsu_id]:
                if j != i:
                    out.append(derive_edge_id(creds, i, j))
        return out


def edge_direction(eid: EdgeId, rsu_id: bytes) -> tuple[bytes, bytes]:
    """Direction of travel for a recovered edge id.

    An id derived at a receiver for its sender means sender -> receiver.  Ids
    naming the RSU as neighbor are the last forwarder's outgoing edge.
    """
    if eid.to_node == rsu_id:
        return eid.from_node, rsu_id
    return eid.to_node, eid.from_node


def recover_edges(bf1: BloomFilter, keystore: KeyStore, pid: bytes, k1: int) -> set[EdgeId]:
    return {
        eid for eid in keystore.all_edges() if bf1.query(edge_indices(eid, pid, k1, bf1.m))
    }


def enumerate_paths(
    edges: Iterable[EdgeId], source_id: bytes, rsu_id: bytes, h: int
) -> list[tuple[bytes, ...]]:
    """All simple ``h``-hop paths source -> RSU over the recovered edges."""
    if h < 1:
        raise DomainError("h must be >= 1")
    adj: dict[bytes, set[bytes]] = {}
    for eid in edges:
        a, b = edge_direction(eid, rsu_id)
        adj.setdefault(a, set()).add(b)
    paths = []
    stack = [(source_id,)]
    while stack:
        path = stack.pop()
        if len(path) == h + 1:
            if path[-1] == rsu_id:
                paths.append(path)
            continue
        for nxt in sorted(adj.get(path[-1], ())):
            if nxt in path:
                continue
            # the RSU may only close the path
            if nxt == rsu_id and len(path) != h:
                continue
            stack.append(path + (nxt,))
    paths.sort()
    return paths


def recover_segments(
    bf2: BloomFilter,
    path_nodes: Sequence[bytes],
    keystore: KeyStore,
    r: int,
    pid: bytes,
    k2: int,
) -> dict[bytes, frozenset[int]]:
    if not path_nodes:
        raise DomainError("path_nodes must be non-empty")
    out = {}
    for node in path_nodes:
        creds = keystore[node]
        out[node] = frozenset(
            s for s in range(1, r + 1) if bf2.query(segment_indices(creds, s, pid, k2, bf2.m))
        )
    return out


def surviving_segments(
    sets_rsu_first: Sequence[Iterable[int]], beta: int, r: int
) -> tuple[list[frozenset[int]], int]:
    """Per-position values that lie on at least one valid full assignment.

    ``sets_rsu_first[t]`` holds the candidate segments of the node ``t`` hops
    before the RSU (0 = last forwarder).  Returns the pruned sets and the
    number of valid assignments.  Forward reachability from the RSU root is
    intersected with backward extendability, which is equivalent to
    collecting every surviving assignment and taking per-node unions.
    """
    L = len(sets_rsu_first)
    sets = [set(s) for s in sets_rsu_first]
    fwd = []  # fwd[t][v]: number of valid prefixes ending at value v
    prev = {RSU_SEGMENT: 1}
    for t in range(L):
        cur = {}
        for v in sets[t]:
            if not 1 <= v <= r:
                continue
            n = sum(c for u, c in prev.items() if 0 <= v - u <= beta)
            if n:
                cur[v] = n
        fwd.append(cur)
        prev = cur
    total = sum(fwd[-1].values()) if L else 0
    pruned = [frozenset()] * L
    if total == 0:
        return pruned, 0
    ok = set(fwd[-1])
    pruned[-1] = frozenset(ok)
    for t in range(L - 2, -1, -1):
        ok = {v for v in fwd[t] if any(0 <= w - v <= beta for w in ok)}
        pruned[t] = frozenset(ok)
    return pruned, total


@dataclass
class Candidate:
    path: tuple[bytes, ...]  # source first, RSU last
    segments: dict[bytes, frozenset[int]]
    pruned: dict[bytes, frozenset[int]] = field(default_factory=dict)
    assignments: int = 0

    @property
    def embedding_nodes(self) -> tuple[bytes, ...]:
        return self.path[:-1]


@dataclass
class CandidateSet:
    candidates: list[Candidate]

    @property
    def paths(self) -> list[tuple[bytes, ...]]:
        return [c.path for c in self.candidates]

    def __len__(self) -> int:
        return len(self.candidates)


def prune(candidates: CandidateSet, beta: int, r: int) -> CandidateSet:
    """Apply the routing/communication constraints to every candidate path.

    Paths with no valid assignment are dropped; if none remain the provenance
    is inconsistent with the constraints.
    """
    kept = []
    for cand in candidates.candidates:
        nodes_rsu_first = list(reversed(cand.embedding_nodes))
        pruned, count = surviving_segments([cand.segments[n] for n in nodes_rsu_first], beta, r)
        if count == 0:
            continue
        kept.append(
            Candidate(cand.path, cand.segments, dict(zip(nodes_rsu_first, pruned)), count)
        )
    if not kept:
        raise InconsistentProvenanceError("no candidate path satisfies the constraints")
    return CandidateSet(kept)


UNIQUE = "Unique"
FALSE_POSITIVE = "FalsePositive"


@dataclass(frozen=True)
class RecoveryOutcome:
    """``path`` runs source -> RSU; ``segments`` aligns with ``path[:-1]``."""

    tag: str
    path: tuple[bytes, ...] = ()
    segments: tuple[frozenset[int], ...] = ()
    candidate_count: int = 0

    @property
    def unique(self) -> bool:
        return self.tag == UNIQUE

    def segment_map(self) -> dict[bytes, int]:
        if not self.unique:
            raise ValueError("segment map only defined for a unique outcome")
        return {n: next(iter(s)) for n, s in zip(self.path[:-1], self.segments)}

    def csv_row(self, pid: bytes) -> list[str]:
        return [
            pid.hex(),
            self.tag,
            "-".join(_node_str(n) for n in self.path),
            ",".join("|".join(map(str, sorted(s))) for s in self.segments),
            str(self.candidate_count),
        ]


CSV_HEADER = ["pid", "outcome", "path", "segments", "candidate_count"]


def _node_str(node: bytes) -> str:
    try:
        text = node.decode("ascii")
    except UnicodeDecodeError:
        return node.hex()
    return text if text.isprintable() and "-" not in text and "," not in text else node.hex()


def classify(candidates: CandidateSet) -> RecoveryOutcome:
    if not candidates.candidates:
        raise InconsistentProvenanceError("empty candidate set")
    if len(candidates) > 1:
        return RecoveryOutcome(FALSE_POSITIVE, candidate_count=len(candidates))
    cand = candidates.candidates[0]
    nodes = cand.embedding_nodes
    sets = tuple(cand.pruned[n] for n in nodes)
    tag = UNIQUE if all(len(s) == 1 for s in sets) else FALSE_POSITIVE
    return RecoveryOutcome(tag, cand.path, sets, 1)


def recover(
    pkt: ClbfPacket,
    keystore: KeyStore,
    source_id: bytes,
    r: int,
    beta: int,
    k1: int,
    k2: int,
) -> tuple[RecoveryOutcome, CandidateSet]:
    """Full RSU pipeline: edges, paths, segments, pruning, classification.

    The hop length comes from the packet's counter.  Returns the outcome and
    the unpruned candidate set.
    """
    h = pkt.hop_counter
    if h < 1:
        raise InconsistentProvenanceError("packet carries no hops")
    edges = recover_edges(pkt.bf1, keystore, pkt.pid, k1)
    paths = enumerate_paths(edges, source_id, keystore.rsu_id, h)
    if not paths:
        raise InconsistentProvenanceError("no h-hop path from the source to the RSU")
    raw = CandidateSet(
        [
            Candidate(p, recover_segments(pkt.bf2, p[:-1], keystore, r, pkt.pid, k2))
            for p in paths
        ]
    )
    return classify(prune(raw, beta, r)), raw


def ground_truth_outcome(path: Sequence[bytes], seg_of: Mapping[bytes, int]) -> RecoveryOutcome:
    return RecoveryOutcome(
        UNIQUE, tuple(path), tuple(frozenset({seg_of[n]}) for n in path[:-1]), 1
    )
