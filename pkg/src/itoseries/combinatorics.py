"""Pair partitions of {1, ..., k} and multiplicity groupings of multi-indices.

Indices in this module are 1-based, matching how the correction terms of
the partition-form expansion are usually written (a_{12,34} etc.).
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

from .errors import DomainError

MAX_ORDER = 12


@dataclass(frozen=True, order=True)
class PairPartition:
    """r unordered pairs plus the k - 2r leftover singletons, in canonical form."""

    pairs: tuple[tuple[int, int], ...]
    singles: tuple[int, ...]

    def __post_init__(self):
        flat = [g for p in self.pairs for g in p] + list(self.singles)
        if sorted(flat) != list(range(1, len(flat) + 1)):
            raise DomainError(f"partition does not cover 1..k exactly: {self.pairs}, {self.singles}")
        if any(a >= b for a, b in self.pairs):
            raise DomainError("pairs must be stored smaller index first")
        if list(self.pairs) != sorted(self.pairs) or list(self.singles) != sorted(self.singles):
            raise DomainError("partition is not in canonical order")

    @property
    def k(self) -> int:
        return 2 * len(self.pairs) + len(self.singles)

    @property
    def r(self) -> int:
        return len(self.pairs)

    def __str__(self) -> str:
        sep = "" if self.k < 10 else "-"
        pairs = ",".join(f"{a}{sep}{b}" for a, b in self.pairs)
        return pairs + "|" + " ".join(str(q) for q in self.singles)

    @classmethod
    def parse(cls, text: str) -> "PairPartition":
        """Inverse of ``str()``: "12,34|5" or, for k >= 10, "1-12,3-4|...".

        Raises DomainError on malformed text.
        """
        try:
            head, tail = text.strip().split("|")
            pairs = []
            for tok in filter(None, head.split(",")):
                a, b = tok.split("-") if "-" in tok else (tok[0], tok[1:])
                pairs.append((int(a), int(b)))
            singles = tuple(int(q) for q in tail.split())
        except ValueError as exc:
            raise DomainError(f"cannot parse pair partition {text!r}") from exc
        return cls(tuple(pairs), singles)


def _matchings(items):
    """Perfect matchings of ``items``, each first element paired with a later one."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for idx, other in enumerate(rest):
        for tail in _matchings(rest[:idx] + rest[idx + 1:]):
            yield ((first, other),) + tail


def partition_count(k: int, r: int) -> int:
    return math.factorial(k) // (2**r * math.factorial(r) * math.factorial(k - 2 * r))


@functools.lru_cache(maxsize=None)
def enumerate_pair_partitions(k: int, r: int) -> tuple[PairPartition, ...]:
    """All partitions of {1..k} into r unordered pairs and k - 2r singletons.

    Returned in sorted canonical order; the count is k! / (2^r r! (k-2r)!).
    """
    if not 1 <= k <= MAX_ORDER:
        raise DomainError(f"k must be in [1, {MAX_ORDER}], got {k}")
    if not 1 <= r <= k // 2:
        raise DomainError(f"r must be in [1, {k // 2}] for k={k}, got {r}")
    out = []
    universe = range(1, k + 1)
    for chosen in itertools.combinations(universe, 2 * r):
        singles = tuple(q for q in universe if q not in chosen)
        for pairs in _matchings(chosen):
            out.append(PairPartition(tuple(sorted(pairs)), singles))
    out.sort()
    return tuple(out)


@dataclass(frozen=True)
class MultiplicityStructure:
    """Blocks of equal entries of a multi-index, in first-appearance order.

    ``block_positions`` holds 1-based positions.
    """

    distinct_values: tuple[int, ...]
    block_positions: tuple[tuple[int, ...], ...]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.block_positions)

    @property
    def k(self) -> int:
        return sum(self.multiplicities)


@functools.lru_cache(maxsize=4096)
def multiplicity_structure(mi: tuple[int, ...]) -> MultiplicityStructure:
    mi = tuple(int(i) for i in mi)
    if any(i < 0 for i in mi):
        raise DomainError(f"multi-index entries must be nonnegative, got {mi}")
    blocks: dict[int, list[int]] = {}
    for pos, value in enumerate(mi, start=1):
        blocks.setdefault(value, []).append(pos)
    return MultiplicityStructure(tuple(blocks), tuple(tuple(b) for b in blocks.values()))


@dataclass(frozen=True)
class JGrouping:
    """Per i-block, the distinct j-values (first-appearance order) and their counts."""

    values: tuple[tuple[int, ...], ...]
    counts: tuple[tuple[int, ...], ...]


def j_grouping(ms: MultiplicityStructure, jx) -> JGrouping:
    jx = tuple(int(j) for j in jx)
    if len(jx) != ms.k:
        raise DomainError(f"j-index has length {len(jx)}, expected {ms.k}")
    values, counts = [], []
    for block in ms.block_positions:
        tally: dict[int, int] = {}
        for pos in block:
            j = jx[pos - 1]
            tally[j] = tally.get(j, 0) + 1
        values.append(tuple(tally))
        counts.append(tuple(tally.values()))
    return JGrouping(tuple(values), tuple(counts))
