"""Query-model simulators for greedy justified-candidate selection.

Two access models hide the profile behind an oracle:

* exact: querying a candidate subset returns, for every subset of it, the
  number of voters approving exactly that subset;
* noisy: each query picks a voter uniformly at random and reveals only the
  intersection of her ballot with the queried set.

The exact simulator reproduces the full-information greedy rule while
querying only committee-sized sets, partitioning the unselected candidates
into ``ceil((m - i) / (k - i))`` cells per selection round.  The noisy
simulator replaces exact counts with empirical frequencies against the
threshold ``ell (2k + 1) / (2k (k + 1))`` and, per round, draws
``h = ceil(2 ln(mk / delta) (2k(k+1))^2)`` samples per cell; with
probability at least ``1 - delta`` its output satisfies EJR+.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from prvote.core import WeakProfile
from prvote.rules import TieBreak

__all__ = [
    "QueryLedger",
    "ExactQueryOracle",
    "NoisyQueryOracle",
    "exact_query_gjcr",
    "noisy_gjcr",
    "noisy_sample_count",
    "exact_query_bound",
]


@dataclass
class QueryLedger:
    """Accounting of oracle usage: total queries and subset-size histogram."""

    mode: str
    sizes: Counter = field(default_factory=Counter)

    def record(self, size: int, count: int = 1):
        self.sizes[size] += count

    @property
    def total(self) -> int:
        return sum(self.sizes.values())

    @property
    def max_size(self) -> int:
        return max(self.sizes, default=0)


class ExactQueryOracle:
    """Exact-count oracle: reveals the joint approval histogram restricted
    to a queried candidate set, and nothing else about the profile."""

    def __init__(self, profile: WeakProfile):
        if not profile.is_dichotomous:
            raise ValueError("query models are defined for approval profiles")
        self.__ballots = [frozenset(b) for b in profile.ranks]
        self.m = profile.m
        self.ledger = QueryLedger("exact")
        self.__cache: dict = {}

    def query(self, cand_set: frozenset) -> dict:
        """Histogram {subset: voter count} over subsets of ``cand_set``.
        Repeating a query is free (the answer is already known)."""
        cand_set = frozenset(cand_set)
        if cand_set not in self.__cache:
            histogram: Counter = Counter(b & cand_set for b in self.__ballots)
            self.__cache[cand_set] = dict(histogram)
            self.ledger.record(len(cand_set))
        return self.__cache[cand_set]


class NoisyQueryOracle:
    """Random-voter oracle: each query reveals one uniformly drawn voter's
    ballot restricted to the queried set.  Batched for simulation speed; a
    batch of ``h`` draws is exactly ``h`` independent queries."""

    def __init__(self, profile: WeakProfile, rng: np.random.Generator):
        if not profile.is_dichotomous:
            raise ValueError("query models are defined for approval profiles")
        self.__ballots = [frozenset(b) for b in profile.ranks]
        self.__n = profile.n
        self.m = profile.m
        self.rng = rng
        self.ledger = QueryLedger("noisy")

    def query_batch(self, cand_set: frozenset, h: int) -> list:
        """``h`` independent single-voter queries, aggregated as
        (restricted ballot, multiplicity) pairs."""
        cand_set = frozenset(cand_set)
        counts = self.rng.multinomial(h, np.full(self.__n, 1 / self.__n))
        self.ledger.record(len(cand_set), h)
        out: Counter = Counter()
        for voter, mult in enumerate(counts):
            if mult:
                out[self.__ballots[voter] & cand_set] += int(mult)
        return list(out.items())


def _partition_cells(unselected: list, cell_size: int) -> list:
    return [
        unselected[i : i + cell_size] for i in range(0, len(unselected), cell_size)
    ]


def exact_query_bound(m: int, k: int) -> int:
    """Closed-form cap on exact-mode queries: one partition per selection."""
    return sum(-(-(m - i) // (k - i)) for i in range(k))


def exact_query_gjcr(
    oracle: ExactQueryOracle, k: int, tiebreak: TieBreak | None = None
) -> tuple:
    """Greedy justified-candidate selection through the exact-query oracle.

    Returns ``(committee, ledger)``; the committee equals the
    full-information rule under the same tie-breaking, and the ledger stays
    within :func:`exact_query_bound` with every query of size at most k.
    """
    tiebreak = tiebreak or TieBreak.lex()
    m = oracle.m
    committee: set = set()
    n_total = None
    for ell in range(k, 0, -1):
        while len(committee) < k:
            unselected = sorted(set(range(m)) - committee)
            cells = _partition_cells(unselected, k - len(committee))
            eligible = []
            for cell in cells:
                histogram = oracle.query(frozenset(committee) | frozenset(cell))
                if n_total is None:
                    n_total = sum(histogram.values())
                for cand in cell:
                    qualifying = sum(
                        count
                        for subset, count in histogram.items()
                        if cand in subset and len(subset & committee) < ell
                    )
                    if qualifying * k >= ell * n_total:
                        eligible.append(cand)
            if not eligible:
                break
            committee.add(tiebreak.pick(eligible))
    return frozenset(committee), oracle.ledger


def noisy_sample_count(m: int, k: int, delta: float) -> int:
    """Per-cell sample count ``h``; natural log, rounded up to an integer."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie strictly between 0 and 1")
    return math.ceil(2 * math.log(m * k / delta) * (2 * k * (k + 1)) ** 2)


def noisy_gjcr(
    oracle: NoisyQueryOracle, k: int, delta: float, tiebreak: TieBreak | None = None
) -> tuple:
    """Greedy justified-candidate selection from noisy single-voter queries.

    Each round partitions the unselected candidates, draws ``h`` samples per
    cell, and elects any candidate whose empirical qualifying frequency
    reaches ``ell (2k + 1) / (2k (k + 1))``; failing that, the entitlement
    ``ell`` decays against the stale counts until some candidate would
    qualify, and fresh samples are drawn.  Returns ``(committee, ledger)``.
    """
    tiebreak = tiebreak or TieBreak.lex()
    m = oracle.m
    h = noisy_sample_count(m, k, delta)
    committee: set = set()
    ell = k
    while ell >= 1 and len(committee) < k:
        cells = _partition_cells(
            sorted(set(range(m)) - committee), k - len(committee)
        )
        freq: dict = {}
        for cell in cells:
            responses = oracle.query_batch(
                frozenset(committee) | frozenset(cell), h
            )
            for cand in cell:
                freq[cand] = sum(
                    count
                    for subset, count in responses
                    if cand in subset and len(subset & committee) < ell
                )
        # threshold comparison in integers: a_c / h >= ell(2k+1) / (2k(k+1))
        def qualifying(level):
            return [
                cand
                for cand, a in freq.items()
                if a * 2 * k * (k + 1) >= h * level * (2 * k + 1)
            ]

        hits = qualifying(ell)
        if hits:
            committee.add(tiebreak.pick(hits))
        else:
            while ell >= 1 and not qualifying(ell):
                ell -= 1
    return frozenset(committee), oracle.ledger
