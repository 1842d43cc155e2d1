"""Uniform sampling of valid segment sequences (equivalently, spatial maps)."""

from __future__ import annotations

import numpy as np

from ..segments import RSU_SEGMENT, DomainError, _check_params


class SequenceSampler:
    """Draw sequences uniformly from the valid set without enumerating it.

    ``completions[t][v]`` counts the valid ways to fill positions ``t..L-1``
    given that position ``t`` holds ``v``; sampling walks forward choosing
    each value with probability proportional to its completion count.
    """

    def __init__(self, L: int, beta: int, r: int):
        _check_params(beta, r)
        if L < 1:
            raise DomainError("L must be >= 1")
        self.L, self.beta, self.r = L, beta, r
        comp = [[0] * (r + 2) for _ in range(L)]
        for v in range(1, r + 1):
            comp[L - 1][v] = 1
        for t in range(L - 2, -1, -1):
            for v in range(1, r + 1):
                comp[t][v] = sum(comp[t + 1][v : min(v + beta, r) + 1])
        self.total = sum(comp[0][RSU_SEGMENT : min(RSU_SEGMENT + beta, r) + 1])
        # cumulative conditional probabilities over offsets 0..beta from prev
        self._cum = np.zeros((L, r + 1, beta + 1))
        for t in range(L):
            for prev in range(1, r + 1):
                w = [comp[t][prev + o] if prev + o <= r else 0 for o in range(beta + 1)]
                s = sum(w)
                if s:
                    self._cum[t, prev] = np.cumsum([x / s for x in w])
        for t in range(L):
            self._cum[t, :, -1] = 1.0

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``(n, L)`` array of sequences, RSU side first."""
        out = np.empty((n, self.L), dtype=np.int64)
        prev = np.full(n, RSU_SEGMENT, dtype=np.int64)
        for t in range(self.L):
            u = rng.random(n)
            cum = self._cum[t, prev]
            offset = (u[:, None] >= cum).sum(axis=1)
            if t == 0:
                # the root is not a sequence element, so offsets start at the root
                cur = RSU_SEGMENT + offset
            else:
                cur = prev + offset
            out[:, t] = cur
            prev = cur
        return out


def draw_spatial_map(L: int, beta: int, r: int, rng: np.random.Generator) -> tuple[int, ...]:
    """One uniform draw from the valid sequences of length ``L``."""
    return tuple(int(v) for v in SequenceSampler(L, beta, r).draw(1, rng)[0])
