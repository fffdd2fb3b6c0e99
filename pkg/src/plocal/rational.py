"""Rational Betti numbers of classifying spaces with polynomial rational cohomology.

dim_Q H^{2k}(BG; Q) for G = SL_{n_1} × ... × SL_{n_k} (or a quotient by a finite
central subgroup) is the number of multisets of labeled parts summing to k,
one label per Chern class c_i (part i) of each factor.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement

from .errors import PreconditionError


@dataclass(frozen=True)
class PartSpec:
    """Labeled allowed parts; (label, value) pairs with value ≥ 2."""

    parts: tuple[tuple[str, int], ...]

    def __post_init__(self):
        if any(v < 2 for _, v in self.parts):
            raise PreconditionError("all parts must be at least 2")
        if len(set(self.parts)) != len(self.parts):
            raise PreconditionError("labeled parts must be distinct")

    @classmethod
    def ranges(cls, *ranges: tuple[int, int]) -> "PartSpec":
        """One factor per inclusive range (a, b); factors are labeled 1, 2, ..."""
        out = []
        for i, (a, b) in enumerate(ranges, 1):
            if a > b:
                raise PreconditionError(f"empty range {a}..{b}")
            out += [(f"F{i}", v) for v in range(a, b + 1)]
        return cls(tuple(out))

    @classmethod
    def parse(cls, text: str) -> "PartSpec":
        """Parse 'a..b[,c..d]' (a single integer 'a' means a..a)."""
        ranges = []
        for chunk in text.split(","):
            m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+))?\s*", chunk)
            if not m:
                raise PreconditionError(f"cannot parse parts {text!r}")
            a = int(m[1])
            ranges.append((a, int(m[2]) if m[2] else a))
        return cls.ranges(*ranges)

    @classmethod
    def special_linear(cls, *ranks: int) -> "PartSpec":
        """Parts for SL_{n_1} × ... × SL_{n_k}: c_2..c_{n_i} for each factor."""
        return cls.ranges(*((2, n) for n in ranks))

    @property
    def values(self) -> tuple[int, ...]:
        return tuple(v for _, v in self.parts)


def partition_betti(parts: PartSpec, k: int) -> int:
    """Number of multisets of labeled parts summing to k."""
    if k < 0:
        raise PreconditionError("k must be nonnegative")
    return _count(tuple(sorted(parts.values)), k)


@lru_cache(maxsize=None)
def _count(values: tuple[int, ...], k: int) -> int:
    ways = [1] + [0] * k
    for v in values:
        for s in range(v, k + 1):
            ways[s] += ways[s - v]
    return ways[k]


def brute_force_betti(parts: PartSpec, k: int) -> int:
    """Exhaustive multiset enumeration (independent oracle for partition_betti)."""
    labeled = list(parts.parts)
    total = 0
    for size in range(0, k // 2 + 1):
        for combo in combinations_with_replacement(range(len(labeled)), size):
            if sum(labeled[i][1] for i in combo) == k:
                total += 1
    return total


def dim_gap(m: int, n: int) -> int:
    """dim H^{2m+2}(BP(m,n); Q) − dim H^{2m+2}(BPGL_m; Q)."""
    if m < 2:
        raise PreconditionError("dim_gap needs m ≥ 2")
    if n < m:
        raise PreconditionError("dim_gap needs m ≤ n")
    return (partition_betti(PartSpec.ranges((2, n)), m + 1)
            - partition_betti(PartSpec.ranges((2, m)), m + 1))
