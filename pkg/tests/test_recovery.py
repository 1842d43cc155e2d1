import numpy as np
import pytest
from hypothesis import given, strategies as st

from clbf.core import BloomFilter, ClbfPacket, NodeCredentials, derive_edge_id, forward_step
from clbf.recovery import (
    CSV_HEADER,
    FALSE_POSITIVE,
    UNIQUE,
    Candidate,
    CandidateSet,
    InconsistentProvenanceError,
    KeyStore,
    classify,
    enumerate_paths,
    ground_truth_outcome,
    prune,
    recover,
    recover_edges,
    recover_segments,
    surviving_segments,
)
from clbf.segments import iter_valid_sequences

RSU = b"rsu"


def make_chain(n, seed=0):
    rng = np.random.default_rng(seed)
    creds = [NodeCredentials(f"v{i}".encode(), rng.bytes(16)) for i in range(n)]
    return creds, KeyStore.from_credentials(RSU, creds)


def send(path_creds, segs, pid=b"P" * 8, m1=512, k1=8, m2=256, k2=8):
    pkt = ClbfPacket.new(pid, m1, k1, m2, k2)
    prev = None
    for i, (c, s) in enumerate(zip(path_creds, segs)):
        forward_step(pkt, c, prev, s, k1, k2, RSU if i == len(path_creds) - 1 else None)
        prev = c.node_id
    return pkt


def eid(c, other):
    return derive_edge_id(c, c.node_id, other)


def test_recover_edges_empty_filter():
    creds, ks = make_chain(3)
    assert recover_edges(BloomFilter(64, 4), ks, b"p", 4) == set()


def test_enumerate_paths_fixtures():
    a, b, c, d = (NodeCredentials(x, x * 16) for x in (b"a", b"b", b"c", b"d"))
    chain = {eid(b, b"a"), eid(b, RSU)}
    assert enumerate_paths(chain, b"a", RSU, 2) == [(b"a", b"b", RSU)]
    # spurious dead-end edge adds no path
    assert enumerate_paths(chain | {eid(c, b"b")}, b"a", RSU, 2) == [(b"a", b"b", RSU)]
    # two disjoint routes
    twin = chain | {eid(c, b"a"), eid(c, RSU)}
    assert enumerate_paths(twin, b"a", RSU, 2) == [(b"a", b"b", RSU), (b"a", b"c", RSU)]
    # the RSU cannot appear mid-path
    assert enumerate_paths(chain, b"a", RSU, 3) == []


def test_recover_segments_saturated():
    creds, ks = make_chain(2)
    full = BloomFilter(16, 2, (1 << 16) - 1)
    got = recover_segments(full, [c.node_id for c in creds], ks, 5, b"p", 2)
    assert all(s == frozenset(range(1, 6)) for s in got.values())


def test_example_fixture_pruning():
    # true sequence (2, 4, 6) with beta=2, r=7; the outer node is position 2
    pruned, n = surviving_segments([{2}, {4}, {6, 7}], 2, 7)
    assert n == 1 and pruned[2] == {6}
    pruned, n = surviving_segments([{2}, {4}, {6, 2}], 2, 7)
    assert n == 1
    pruned, n = surviving_segments([{2}, {4}, {6, 5}], 2, 7)
    assert n == 2 and pruned[2] == {5, 6}
    pruned, n = surviving_segments([{2}, {4}, {6, 4}], 2, 7)
    assert n == 2


@given(st.integers(1, 4), st.integers(1, 3), st.integers(1, 6), st.data())
def test_surviving_segments_matches_enumeration(L, beta, r, data):
    beta = min(beta, r)
    sets = [data.draw(st.sets(st.integers(1, r), max_size=r)) for _ in range(L)]
    survivors = [s for s in iter_valid_sequences(L, beta, r) if all(v in sets[t] for t, v in enumerate(s))]
    pruned, count = surviving_segments(sets, beta, r)
    assert count == len(survivors)
    for t in range(L):
        assert pruned[t] == {s[t] for s in survivors}
        assert pruned[t] <= sets[t]


def test_classify_cases():
    p1 = (b"a", b"b", RSU)
    single = Candidate(p1, {}, {b"a": frozenset({3}), b"b": frozenset({2})}, 1)
    assert classify(CandidateSet([single])).tag == UNIQUE
    double = Candidate(p1, {}, {b"a": frozenset({3, 4}), b"b": frozenset({2})}, 2)
    assert classify(CandidateSet([double])).tag == FALSE_POSITIVE
    assert classify(CandidateSet([single, single])).tag == FALSE_POSITIVE
    with pytest.raises(InconsistentProvenanceError):
        classify(CandidateSet([]))


def test_prune_drops_impossible_paths():
    good = Candidate((b"a", RSU), {b"a": frozenset({1})})
    bad = Candidate((b"b", RSU), {b"b": frozenset({5})})
    out = prune(CandidateSet([good, bad]), 1, 5)
    assert out.paths == [(b"a", RSU)]
    with pytest.raises(InconsistentProvenanceError):
        prune(CandidateSet([bad]), 1, 5)


def test_end_to_end_unique_equals_truth():
    creds, ks = make_chain(6, seed=4)
    path = creds[:5]
    segs = [6, 5, 3, 2, 1]  # source first
    pkt = send(path, segs, m1=2048, k1=12, m2=1024, k2=12)
    outcome, raw = recover(pkt, ks, path[0].node_id, r=8, beta=2, k1=12, k2=12)
    truth = ground_truth_outcome([c.node_id for c in path] + [RSU], {c.node_id: s for c, s in zip(path, segs)})
    assert outcome == truth
    row = outcome.csv_row(pkt.pid)
    assert len(row) == len(CSV_HEADER) and row[1] == UNIQUE
    assert row[2] == "v0-v1-v2-v3-v4-rsu" and row[3] == "6,5,3,2,1"


@given(st.integers(0, 2**32 - 1))
def test_soundness_small_filters(seed):
    rng = np.random.default_rng(seed)
    creds, ks = make_chain(5, seed)
    h = int(rng.integers(1, 5))
    order = rng.permutation(5)[:h]
    path = [creds[i] for i in order]
    seq = [1]
    for _ in range(h - 1):
        seq.append(min(6, seq[-1] + int(rng.integers(0, 3))))
    segs = seq[::-1]
    pkt = send(path, segs, m1=24, k1=2, m2=12, k2=2)
    outcome, raw = recover(pkt, ks, path[0].node_id, r=6, beta=2, k1=2, k2=2)
    true_path = tuple(c.node_id for c in path) + (RSU,)
    cand = next(c for c in raw.candidates if c.path == true_path)
    assert all(s in cand.segments[c.node_id] for c, s in zip(path, segs))
