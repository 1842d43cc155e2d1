"""Monte-Carlo estimation of the provenance false-positive rate.

Two modes share one report type:

``fast``
    Random-oracle model of BF2 only (the path is taken as known, matching the
    analytical model).  Every (node, segment) pair gets an independent index
    stream of length ``max(k2)``; a pair with ``k2`` hashes uses the stream's
    first ``k2`` entries, exactly as the real hash counter does.  Sweeping
    ``k2`` therefore reuses the same randomness for every point (common random
    numbers), which keeps the curve's shape free of point-to-point noise.
``protocol``
    Full pipeline: keys, edge ids, both filters, RSU-side recovery and pruning.
    Slower; used for soundness checks and cross-validation of ``fast``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields
from functools import partial
from pathlib import Path
from typing import Sequence

import numpy as np

from ..core import ClbfPacket, NodeCredentials, forward_step, optimal_k1
from ..recovery import KeyStore, recover
from ..segments import RSU_SEGMENT, DomainError, _check_params, validate_sequence
from ..parallel import pmap
from .sampling import SequenceSampler

DEFAULT_SEED = 20240601
CHUNK = 1000
# cap on the (batch, L, r, k2) index tensor in fast mode
_FAST_CELLS = 3_000_000
# pid, hop counter and three length fields on the wire
HEADER_BITS = 8 * (8 + 1 + 2 + 2 + 2)
PLACEMENTS = ("uniform-valid", "fixed")
MODES = ("fast", "protocol")


@dataclass
class ScenarioConfig:
    N: int = 6
    h: int = 5
    r: int = 15
    beta: int = 2
    segment_length_m: float = 100.0
    m1: int = 256
    m2: int = 100
    k1: int = 0  # 0 picks the standard Bloom optimum for h edges
    k2: int = 13
    trials: int = 100_000
    master_seed: int = DEFAULT_SEED
    placement: str = "uniform-valid"
    fixed_map: tuple = ()
    mode: str = "fast"
    L: int = 0  # 0 means L = h
    payload_bytes: int = 0

    def __post_init__(self):
        self.fixed_map = tuple(int(v) for v in self.fixed_map)
        _check_params(self.beta, self.r)
        if self.h < 1:
            raise DomainError("h must be >= 1")
        if self.h > self.N - 1:
            raise DomainError(f"h={self.h} needs at least h+1 nodes, N={self.N}")
        if not 1 <= self.k2 <= self.m2:
            raise DomainError(f"need 1 <= k2 <= m2, got k2={self.k2}, m2={self.m2}")
        if self.m1 < 1:
            raise DomainError("m1 must be >= 1")
        if self.k1 == 0:
            self.k1 = optimal_k1(self.m1, self.h)
        if not 1 <= self.k1 <= self.m1:
            raise DomainError("need 1 <= k1 <= m1")
        if self.trials < 1:
            raise DomainError("trials must be >= 1")
        if self.placement not in PLACEMENTS:
            raise DomainError(f"placement must be one of {PLACEMENTS}")
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if self.L == 0:
            self.L = self.h
        if self.mode == "protocol" and self.L != self.h:
            raise DomainError("protocol mode embeds one segment per hop, so L must equal h")
        if self.placement == "fixed":
            if len(self.fixed_map) != self.L:
                raise DomainError("fixed_map must list one segment per embedding node")
            validate_sequence(self.fixed_map, self.beta, self.r)
        if not 0 <= self.master_seed < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")

    def replace(self, **changes) -> "ScenarioConfig":
        d = asdict(self)
        if "h" in changes and "L" not in changes and self.L == self.h:
            d["L"] = 0
        if ("m1" in changes or "h" in changes) and "k1" not in changes:
            d["k1"] = 0
        d.update(changes)
        return ScenarioConfig(**d)

    # key=value text form -------------------------------------------------

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(map(str, v))
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ScenarioConfig":
        kinds = {f.name: type(f.default) for f in fields(cls)}
        kw = {}
        for n, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"line {n}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            if key not in kinds:
                raise DomainError(f"line {n}: unknown key {key!r}")
            kind = kinds[key]
            try:
                if kind is tuple:
                    kw[key] = tuple(int(v) for v in value.split(",") if v.strip())
                elif kind is int:
                    kw[key] = int(value, 0)
                else:
                    kw[key] = kind(value)
            except ValueError as exc:
                raise DomainError(f"line {n}: bad value for {key}: {value!r}") from exc
        return cls(**kw)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        return cls.from_text(Path(path).read_text())


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    p = k / n
    den = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class SimReport:
    fp_count: int
    trials: int
    avg_packet_bits: float = 0.0
    avg_provenance_bits: float = 0.0
    avg_sparsity: float = 0.0
    end_to_end_delay_units: float = 0.0
    seeds: tuple = ()
    k2: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def fp_rate(self) -> float:
        return self.fp_count / self.trials if self.trials else 0.0

    @property
    def sigma(self) -> float:
        """Binomial standard error of ``fp_rate``."""
        p = self.fp_rate
        return math.sqrt(p * (1 - p) / self.trials) if self.trials else 0.0

    @property
    def ci(self) -> tuple[float, float]:
        return wilson_interval(self.fp_count, self.trials)

    @property
    def ci_half_width(self) -> float:
        lo, hi = self.ci
        return (hi - lo) / 2


def chunk_seed(master_seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(master_seed, spawn_key=(index,))


def _chunks(trials: int) -> list[tuple[int, int]]:
    return [(i, min(CHUNK, trials - i * CHUNK)) for i in range(math.ceil(trials / CHUNK))]


# --------------------------------------------------------------------------
# fast mode


def count_assignments(mask: np.ndarray, beta: int, cap: int = 2) -> np.ndarray:
    """Valid assignments per row of a ``(n, L, r)`` boolean candidate mask.

    Counts saturate at ``cap``; only "none / one / several" matters here.
    """
    n, L, r = mask.shape
    v = np.arange(1, r + 1)
    ways = (mask[:, 0, :] & (v <= RSU_SEGMENT + beta)[None, :]).astype(np.int64)
    for t in range(1, L):
        cs = np.zeros((n, r + 1), dtype=np.int64)
        np.cumsum(ways, axis=1, out=cs[:, 1:])
        lo = np.maximum(v - beta - 1, 0)
        win = cs[:, v] - cs[:, lo]
        ways = np.minimum(win, cap) * mask[:, t, :]
    return np.minimum(ways.sum(axis=1), cap)


def _fast_batch(x, m2, k2_values, beta, r, rng):
    n, L = x.shape
    K = max(k2_values)
    U = rng.integers(0, m2, size=(n, L, r, K), dtype=np.int32)
    true = U[np.arange(n)[:, None], np.arange(L)[None, :], x - 1]  # (n, L, K)
    # set_time[b, bit]: smallest k2 at which the true embedding lights the bit
    set_time = np.full((n, m2), K + 1, dtype=np.int32)
    rows = np.arange(n)[:, None]
    for l in range(K - 1, -1, -1):
        set_time[rows, true[:, :, l]] = l + 1
    T = set_time[np.arange(n)[:, None, None, None], U]
    M = np.maximum.accumulate(T, axis=3)
    fp = {}
    lit = {}
    for k2 in k2_values:
        mask = M[..., k2 - 1] <= k2
        fp[k2] = int((count_assignments(mask, beta) > 1).sum())
        lit[k2] = int((set_time <= k2).sum())
    return fp, lit


def _fast_chunk(cfg: ScenarioConfig, k2_values: tuple[int, ...], job: tuple[int, int]):
    index, size = job
    rng = np.random.default_rng(chunk_seed(cfg.master_seed, index))
    sampler = SequenceSampler(cfg.L, cfg.beta, cfg.r)
    batch = max(1, _FAST_CELLS // (cfg.L * cfg.r * max(k2_values)))
    fp = dict.fromkeys(k2_values, 0)
    lit = dict.fromkeys(k2_values, 0)
    done = 0
    while done < size:
        n = min(batch, size - done)
        if cfg.placement == "fixed":
            x = np.tile(np.array(cfg.fixed_map, dtype=np.int64), (n, 1))
        else:
            x = sampler.draw(n, rng)
        f, a = _fast_batch(x, cfg.m2, k2_values, cfg.beta, cfg.r, rng)
        for k in k2_values:
            fp[k] += f[k]
            lit[k] += a[k]
        done += n
    return fp, lit


def simulate_fp_curve(cfg: ScenarioConfig, k2_values: Sequence[int]) -> list[SimReport]:
    """One report per ``k2``; fast mode shares randomness across the sweep."""
    k2_values = tuple(sorted(set(int(k) for k in k2_values)))
    if not k2_values or k2_values[0] < 1 or k2_values[-1] > cfg.m2:
        raise DomainError(f"k2 values must lie in [1, {cfg.m2}]")
    if cfg.mode == "protocol":
        return [simulate_fp_rate(cfg.replace(k2=k)) for k in k2_values]
    jobs = _chunks(cfg.trials)
    parts = pmap(partial(_fast_chunk, cfg, k2_values), jobs)
    seeds = tuple(int(chunk_seed(cfg.master_seed, i).generate_state(1)[0]) for i, _ in jobs)
    out = []
    for k2 in k2_values:
        fp = sum(p[0][k2] for p in parts)
        lit = sum(p[1][k2] for p in parts)
        prov = cfg.m1 + cfg.m2
        out.append(
            SimReport(
                fp_count=fp,
                trials=cfg.trials,
                avg_packet_bits=HEADER_BITS + prov + 8 * cfg.payload_bytes,
                avg_provenance_bits=prov,
                avg_sparsity=lit / (cfg.trials * cfg.m2),
                # h segment embeddings, h edge embeddings, h keyed edge ids
                end_to_end_delay_units=cfg.h * (k2 + cfg.k1 + 1),
                seeds=seeds,
                k2=k2,
                extra={"mode": "fast", "seed_scope": "chunk"},
            )
        )
    return out


# --------------------------------------------------------------------------
# protocol mode


def trial_seed(master_seed: int, trial: int) -> int:
    return int(np.random.SeedSequence(master_seed, spawn_key=(trial,)).generate_state(1)[0])


@dataclass
class TrialResult:
    false_positive: bool
    sound: bool
    popcount2: int
    cost: int
    packet_bits: int


def protocol_trial(cfg: ScenarioConfig, seed: int, sampler: SequenceSampler | None = None) -> TrialResult:
    """One packet end to end with real keys and hashing."""
    rng = np.random.default_rng(seed)
    rsu = b"rsu"
    creds = [NodeCredentials(f"v{i}".encode(), rng.bytes(16)) for i in range(cfg.N - 1)]
    order = rng.permutation(len(creds))[: cfg.h]
    path = [creds[i] for i in order]  # source first
    if cfg.placement == "fixed":
        x = cfg.fixed_map
    else:
        sampler = sampler or SequenceSampler(cfg.L, cfg.beta, cfg.r)
        x = tuple(int(v) for v in sampler.draw(1, rng)[0])
    seg_of = {c.node_id: x[cfg.h - 1 - i] for i, c in enumerate(path)}
    pkt = ClbfPacket.new(rng.bytes(8), cfg.m1, cfg.k1, cfg.m2, cfg.k2, b"\0" * cfg.payload_bytes)
    prev = None
    for i, c in enumerate(path):
        last = i == cfg.h - 1
        forward_step(pkt, c, prev, seg_of[c.node_id], cfg.k1, cfg.k2, rsu if last else None)
        prev = c.node_id
    keystore = KeyStore.from_credentials(rsu, creds)
    true_path = tuple(c.node_id for c in path) + (rsu,)
    outcome, raw = recover(pkt, keystore, path[0].node_id, cfg.r, cfg.beta, cfg.k1, cfg.k2)
    sound = False
    for cand in raw.candidates:
        if cand.path == true_path:
            sound = all(seg_of[n] in cand.segments[n] for n in true_path[:-1])
    if outcome.unique:
        sound = sound and outcome.path == true_path and outcome.segment_map() == seg_of
    return TrialResult(
        not outcome.unique,
        sound,
        pkt.bf2.popcount(),
        pkt.cost["hash"] + pkt.cost["prf"],
        8 * len(pkt.to_bytes()),
    )


def _protocol_chunk(cfg: ScenarioConfig, job: tuple[int, int]):
    index, size = job
    sampler = SequenceSampler(cfg.L, cfg.beta, cfg.r)
    res = [protocol_trial(cfg, trial_seed(cfg.master_seed, index * CHUNK + t), sampler) for t in range(size)]
    return (
        sum(r.false_positive for r in res),
        sum(not r.sound for r in res),
        sum(r.popcount2 for r in res),
        sum(r.cost for r in res),
        sum(r.packet_bits for r in res),
    )


def simulate_fp_rate(cfg: ScenarioConfig) -> SimReport:
    """Estimate the false-positive rate of ``cfg`` at its ``k2``."""
    if cfg.mode == "fast":
        return simulate_fp_curve(cfg, [cfg.k2])[0]
    jobs = _chunks(cfg.trials)
    parts = pmap(partial(_protocol_chunk, cfg), jobs)
    fp, unsound, pop, cost, pbits = (sum(col) for col in zip(*parts))
    n = cfg.trials
    return SimReport(
        fp_count=fp,
        trials=n,
        avg_packet_bits=pbits / n,
        avg_provenance_bits=cfg.m1 + cfg.m2,
        avg_sparsity=pop / (n * cfg.m2),
        end_to_end_delay_units=cost / n,
        seeds=tuple(trial_seed(cfg.master_seed, t) for t in range(n)),
        k2=cfg.k2,
        extra={"mode": "protocol", "seed_scope": "trial", "soundness_failures": unsound},
    )


# --------------------------------------------------------------------------
# baseline


def gps_baseline(h: int, payload_bytes: int = 0) -> SimReport:
    """Per-hop 16-byte encrypted blob appended by every node.

    Node ``i`` on the path sees ``16 * i`` provenance bytes, so the average
    over the ``h + 1`` packet copies is ``16 (h + 1) / 2`` bytes.
    """
    if h < 1:
        raise DomainError("h must be >= 1")
    avg_bytes = 16 * (h + 1) / 2
    return SimReport(
        fp_count=0,
        trials=1,
        avg_packet_bits=8 * (avg_bytes + payload_bytes),
        avg_provenance_bits=8 * avg_bytes,
        end_to_end_delay_units=float(h),
        extra={"mode": "analytic"},
    )


# --------------------------------------------------------------------------
# compressed forwarding


class CodecFailure(RuntimeError):
    pass


def _flow_trial(cfg: ScenarioConfig, codec: str | None, rng: np.random.Generator):
    from ..compression import compress, decompress, codec_cost

    m = cfg.m2
    bits = np.zeros(m, dtype=np.int8)
    wire = None
    pop = 0
    size = 0
    cost = 0
    for _ in range(cfg.h):
        if wire is not None:
            got = decompress(wire)
            if got != bits.tolist():
                raise CodecFailure(f"roundtrip mismatch at m={m}, scheme={wire.scheme:#x}")
            cost += wire.original_length + wire.body_bits
        bits[rng.integers(0, m, size=cfg.k2)] = 1
        cost += cfg.k2
        pop += int(bits.sum())
        if codec is None:
            size += m
        else:
            wire = compress(bits.tolist(), codec)
            size += wire.body_bits
            cost += codec_cost(wire) - wire.body_bits
    return pop, size, cost


def simulate_compressed_flow(cfg: ScenarioConfig, codec: str | None = "auto") -> SimReport:
    """Per-hop decompress, embed, compress along an ``h``-hop path.

    Embedding is modelled as ``k2`` uniform indices per hop.  Sparsity is the
    lit fraction averaged over hops; size is the coded body averaged over hops
    (``m2`` when ``codec`` is ``None``).  Trials whose codec fails a roundtrip
    are aborted and counted in ``extra['aborted']``.
    """
    rng = np.random.default_rng(chunk_seed(cfg.master_seed, 0))
    pop = size = cost = 0
    aborted = []
    ok = 0
    for t in range(cfg.trials):
        try:
            p, s, c = _flow_trial(cfg, codec, rng)
        except CodecFailure as exc:
            aborted.append((t, str(exc)))
            continue
        pop += p
        size += s
        cost += c
        ok += 1
    hops = max(1, ok) * cfg.h
    return SimReport(
        fp_count=0,
        trials=cfg.trials,
        avg_packet_bits=HEADER_BITS + cfg.m1 + size / hops + 8 * cfg.payload_bytes,
        avg_provenance_bits=size / hops,
        avg_sparsity=pop / (hops * cfg.m2),
        end_to_end_delay_units=cost / max(1, ok),
        k2=cfg.k2,
        extra={"codec": codec or "none", "aborted": aborted},
    )
