"""False-positive analysis for the segment filter and the ``k2`` optimizer.

Notation follows the protocol: ``L`` embedding nodes each insert ``k2`` hashes
into an ``m2``-bit filter, ``r`` segments, communication constraint ``beta``.
A *false pair* is a (node, segment) pair the RSU checks but nobody embedded;
there are ``F = L * (r - 1)`` of them.
"""

from __future__ import annotations

import csv
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .core import optimal_k1  # noqa: F401  (re-exported: BF1 sizing rule)
from .segments import DomainError, count_valid_sequences, iter_valid_sequences, validate_sequence
from .recovery import surviving_segments

EXACT_INSERTION_LIMIT = 256
DEFAULT_SEQUENCE_CAP = 2_000_000

_clamp_events = Counter()


def clamp_events() -> dict[str, int]:
    """How often a probability had to be clamped into [0, 1], per function."""
    return dict(_clamp_events)


def _clamp(value: float, where: str) -> float:
    if value < 0.0 or value > 1.0:
        _clamp_events[where] += 1
        return min(1.0, max(0.0, value))
    return value


@dataclass(frozen=True)
class FpParams:
    m2: int
    k2: int
    L: int
    r: int
    beta: int
    h: int | None = None

    def __post_init__(self):
        if not 1 <= self.k2 <= self.m2:
            raise DomainError(f"need 1 <= k2 <= m2, got k2={self.k2}, m2={self.m2}")
        if not 1 <= self.beta <= self.r:
            raise DomainError(f"need 1 <= beta <= r, got beta={self.beta}, r={self.r}")
        if self.L < 1:
            raise DomainError("L must be >= 1")


# --------------------------------------------------------------------------
# occupancy distribution of lit bits


def pr_alpha_exact(alpha: int, m2: int, k2: int, L: int) -> Fraction:
    """Probability that exactly ``alpha`` bits are lit, as an exact fraction.

    Inclusion-exclusion over surjections of ``k2 * L`` uniform insertions.
    """
    n = k2 * L
    if not 1 <= alpha <= min(m2, n):
        return Fraction(0)
    surj = sum((-1) ** g * math.comb(alpha, g) * (alpha - g) ** n for g in range(alpha + 1))
    return Fraction(math.comb(m2, alpha) * surj, m2**n)


def occupancy_distribution(m: int, n: int) -> np.ndarray:
    """Distribution of lit bits after ``n`` uniform insertions into ``m`` bits.

    Markov-chain recurrence; every term is non-negative so there is no
    cancellation.  Index ``a`` of the result is ``Pr(alpha = a)``.
    """
    p = np.zeros(m + 1)
    p[0] = 1.0
    return _advance(p, m, n)


def _advance(p: np.ndarray, m: int, steps: int) -> np.ndarray:
    a = np.arange(m + 1)
    stay = a / m
    grow = (m - a + 1) / m
    for _ in range(steps):
        nxt = p * stay
        nxt[1:] += p[:-1] * grow[1:]
        p = nxt
    return p


def pr_alpha(alpha: int, m2: int, k2: int, L: int) -> float:
    """``Pr(alpha)`` for ``k2 * L`` insertions; 0 outside ``[1, min(m2, k2*L)]``."""
    n = k2 * L
    if not 1 <= alpha <= min(m2, n):
        return 0.0
    if n <= EXACT_INSERTION_LIMIT:
        return float(pr_alpha_exact(alpha, m2, k2, L))
    return float(occupancy_distribution(m2, n)[alpha])


def collision_probs(alpha: int, m2: int, k2: int) -> tuple[float, float]:
    if not 0 <= alpha <= m2:
        raise DomainError(f"alpha must lie in [0, {m2}]")
    p1 = (alpha / m2) ** k2
    return p1, 1.0 - p1


# --------------------------------------------------------------------------
# extra-recovery counts


def c_x1(seq: Sequence[int], beta: int, r: int) -> int:
    """Number of valid sequences one substitution away from ``seq``.

    Window form: with the RSU root ``1`` prepended, every interior entry can be
    replaced by any other value compatible with both neighbours, which depends
    only on the spread ``d`` of the two neighbours (``d`` values when
    ``d < beta``, ``2*beta - d`` otherwise).  The outermost entry has no
    successor and can take ``min(r - prev, beta)`` other values.

        C = 0
        p = [1] + seq
        for i in 0 .. L-2:
            d = p[i+2] - p[i]
            C += d            if 0 <= d < beta
            C += 2*beta - d   if beta <= d <= 2*beta
        C += min(r - p[L-1], beta)
    """
    p = (1, *seq)
    L = len(seq)
    c = 0
    for i in range(L - 1):
        d = p[i + 2] - p[i]
        if 0 <= d < beta:
            c += d
        elif beta <= d <= 2 * beta:
            c += 2 * beta - d
    return c + min(r - p[L - 1], beta)


def c_x1_oracle(seq: Sequence[int], beta: int, r: int) -> int:
    """Brute force: try every other value at every position."""
    seq = list(seq)
    count = 0
    for t, orig in enumerate(seq):
        for v in range(1, r + 1):
            if v == orig:
                continue
            seq[t] = v
            if validate_sequence(seq, beta, r):
                count += 1
        seq[t] = orig
    return count


def c_xj_lower(c_x1_value: int, L: int, r: int, j: int) -> int:
    """Lower bound on the ``j``-extra-recovery count from the ``j = 1`` count.

    Counts ``j``-subsets of the false pairs that contain at least one of the
    ``c_x1_value`` single-substitution pairs.
    """
    if j < 1:
        raise DomainError("j must be >= 1")
    F = L * (r - 1)
    return sum(math.comb(F - l, j - 1) for l in range(1, c_x1_value + 1))


def false_pairs(seq: Sequence[int], r: int) -> list[tuple[int, int]]:
    return [(t, v) for t, x in enumerate(seq) for v in range(1, r + 1) if v != x]


def causes_false_positive(seq: Sequence[int], extra, beta: int, r: int) -> bool:
    """True iff the true pairs plus ``extra`` admit more than one valid sequence."""
    sets = [{x} for x in seq]
    for t, v in extra:
        sets[t].add(v)
    return surviving_segments(sets, beta, r)[1] > 1


def c_xj_exact(seq: Sequence[int], beta: int, r: int, j: int) -> int:
    """Exhaustive count of ``j``-subsets of false pairs that cause a false positive."""
    return sum(
        causes_false_positive(seq, extra, beta, r)
        for extra in itertools.combinations(false_pairs(seq, r), j)
    )


# --------------------------------------------------------------------------
# C table


@dataclass(frozen=True)
class CTable:
    L: int
    beta: int
    r: int
    sequences: tuple[tuple[int, ...], ...]
    c1: tuple[int, ...]  # exact single-substitution count per row

    @property
    def F(self) -> int:
        return self.L * (self.r - 1)

    @property
    def size(self) -> int:
        return len(self.sequences)

    def entry(self, x: int, j: int) -> int:
        """``C_{x,j}``: exact for ``j = 1``, lower bound for ``j >= 2``."""
        if j == 1:
            return self.c1[x]
        return c_xj_lower(self.c1[x], self.L, self.r, j)

    @cached_property
    def c1_histogram(self) -> dict[int, int]:
        return dict(Counter(self.c1))

    @cached_property
    def column_sums(self) -> tuple[int, ...]:
        """``(C_1, ..., C_F)``; rows sharing a ``C_{x,1}`` value are grouped."""
        sums = []
        for j in range(1, self.F + 1):
            total = 0
            for c, n in self.c1_histogram.items():
                total += n * (c if j == 1 else c_xj_lower(c, self.L, self.r, j))
            sums.append(total)
        return tuple(sums)

    @cached_property
    def log_column_sums(self) -> np.ndarray:
        return np.array([math.log(c) if c > 0 else -np.inf for c in self.column_sums])

    def to_csv(self, path, max_j: int | None = None) -> None:
        max_j = self.F if max_j is None else min(max_j, self.F)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["sequence"] + [f"j{j}" for j in range(1, max_j + 1)])
            for x, seq in enumerate(self.sequences):
                w.writerow(["-".join(map(str, seq))] + [self.entry(x, j) for j in range(1, max_j + 1)])
            w.writerow(["total"] + list(self.column_sums[:max_j]))


class TableTooLargeError(MemoryError):
    pass


def build_c_table(L: int, beta: int, r: int, cap: int = DEFAULT_SEQUENCE_CAP) -> CTable:
    n = count_valid_sequences(L, beta, r)
    if n > cap:
        raise TableTooLargeError(
            f"|P_beta| = {n} exceeds the cap of {cap}; reduce L or beta"
        )
    seqs = tuple(iter_valid_sequences(L, beta, r))
    return CTable(L, beta, r, seqs, tuple(c_x1(s, beta, r) for s in seqs))


# --------------------------------------------------------------------------
# false-positive probability


def _conditional_fp_vec(alphas: np.ndarray, m2: int, k2: int, table: CTable) -> np.ndarray:
    F = table.F
    j = np.arange(1, F + 1)
    frac = alphas / m2
    with np.errstate(divide="ignore"):
        lp1 = k2 * np.log(frac)
        p1 = frac**k2
        lp2 = np.log1p(-p1)
    # (F - j) * log p2 with the convention 0 * -inf = 0
    rest = F - j
    with np.errstate(invalid="ignore"):
        tail = np.where(rest[None, :] == 0, 0.0, rest[None, :] * lp2[:, None])
    log_terms = table.log_column_sums[None, :] + j[None, :] * lp1[:, None] + tail
    with np.errstate(invalid="ignore"):
        terms = np.where(np.isfinite(log_terms), np.exp(log_terms), 0.0)
    return terms.sum(axis=1) / table.size


def conditional_fp(alpha: int, m2: int, k2: int, table: CTable) -> float:
    """Lower bound on the averaged false-positive probability given ``alpha`` lit bits.

    ``(1/|P|) * sum_j p1^j * p2^(F-j) * C_j`` with ``p1 = (alpha/m2)^k2``.
    """
    if not 0 <= alpha <= m2:
        raise DomainError(f"alpha must lie in [0, {m2}]")
    if alpha == 0:
        return 0.0
    value = float(_conditional_fp_vec(np.array([alpha], dtype=float), m2, k2, table)[0])
    return _clamp(value, "conditional_fp")


def expected_fp(m2: int, k2: int, table: CTable, alpha_dist: np.ndarray | None = None) -> float:
    """Lower bound on the false-positive probability averaged over maps and ``alpha``."""
    if not 1 <= k2 <= m2:
        raise DomainError(f"need 1 <= k2 <= m2, got k2={k2}, m2={m2}")
    if alpha_dist is None:
        alpha_dist = occupancy_distribution(m2, k2 * table.L)
    top = min(m2, k2 * table.L)
    alphas = np.arange(1, top + 1, dtype=float)
    cond = _conditional_fp_vec(alphas, m2, k2, table)
    return _clamp(float(np.dot(alpha_dist[1 : top + 1], cond)), "expected_fp")


@dataclass
class K2Result:
    k2: int
    value: float
    curve: list[tuple[int, float]] = field(default_factory=list)


def fp_curve(m2: int, table: CTable, k2_max: int | None = None) -> list[tuple[int, float]]:
    """``expected_fp`` for every ``k2`` in ``[1, k2_max]`` (default ``m2``)."""
    k2_max = m2 if k2_max is None else min(k2_max, m2)
    dist = np.zeros(m2 + 1)
    dist[0] = 1.0
    out = []
    for k2 in range(1, k2_max + 1):
        dist = _advance(dist, m2, table.L)
        out.append((k2, expected_fp(m2, k2, table, dist)))
    return out


def optimize_k2(
    m2: int,
    L: int,
    beta: int,
    r: int,
    table: CTable | None = None,
    method: str = "scan",
) -> K2Result:
    """Minimise ``expected_fp`` over ``k2``; ties go to the smaller ``k2``."""
    if m2 < 1:
        raise DomainError("m2 must be >= 1")
    table = table if table is not None else build_c_table(L, beta, r)
    if method == "scan":
        curve = fp_curve(m2, table)
        best_k2, best = min(curve, key=lambda kv: (kv[1], kv[0]))
        return K2Result(best_k2, best, curve)
    if method == "descent":
        return _descent(m2, table)
    raise ValueError(f"unknown method {method!r}")


def _descent(m2: int, table: CTable) -> K2Result:
    # discrete descent from the classical Bloom optimum
    k = max(1, min(m2, round(m2 / table.L * math.log(2))))
    seen = {}

    def f(k2):
        if k2 not in seen:
            seen[k2] = expected_fp(m2, k2, table)
        return seen[k2]

    while True:
        moves = [c for c in (k - 1, k + 1) if 1 <= c <= m2 and f(c) < f(k)]
        if not moves:
            break
        k = min(moves, key=f)
    return K2Result(k, f(k), sorted(seen.items()))


def required_m2(
    target: float,
    L: int,
    beta: int,
    r: int,
    m2_max: int = 4096,
    table: CTable | None = None,
) -> int:
    """Smallest ``m2`` whose optimised ``expected_fp`` is at most ``target``.

    Exponential bracketing followed by bisection; assumes the optimum is
    non-increasing in ``m2``.
    """
    table = table if table is not None else build_c_table(L, beta, r)

    def ok(m2):
        return optimize_k2(m2, L, beta, r, table).value <= target

    hi = max(8, L)
    while not ok(hi):
        if hi >= m2_max:
            raise DomainError(f"target {target} not reachable with m2 <= {m2_max}")
        hi = min(2 * hi, m2_max)
    lo = hi // 2
    if ok(lo):
        lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
