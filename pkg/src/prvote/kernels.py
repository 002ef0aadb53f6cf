"""Hot integer kernels for axiom checks at experiment scale.

Every quota comparison in the axioms is an integer cross-multiplication
(``count * k >= ell * n``), so the checks the experiment harness runs
millions of times compile to pure integer array code.  Each kernel is
written once in numba-compatible numpy style and compiled with ``@njit``
when numba is importable; setting ``PRVOTE_NO_NUMBA=1`` (or a missing
numba) selects the same functions uncompiled, running on plain numpy:
slower, bit-identical results.  ``benchmarks/bench_kernels.py`` measures
the gap.

Voter sets are uint64 bitmask words (any ``n``), candidate sets single
uint64 masks (``m <= 63``), committee subsets int64 masks
(``|committee| <= 20``).  :class:`FastInstance` converts a profile to
arrays once and answers repeated committee queries, which is what the
experiment harness uses.
"""

from __future__ import annotations

import os

import numpy as np

from prvote.core import Instance, ScaleGuardError

__all__ = [
    "NUMBA_ENABLED",
    "FastInstance",
    "ejr_plus_check",
    "pjr_plus_check",
    "ejr_check",
    "pjr_check",
    "psc_check",
    "rank_ejr_plus_check",
    "rank_pjr_plus_check",
    "gpsc_scan",
]

if os.environ.get("PRVOTE_NO_NUMBA"):
    NUMBA_ENABLED = False
else:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def _maybe_jit(fn):
    if NUMBA_ENABLED:
        return njit(cache=True)(fn)
    return fn


U0 = np.uint64(0)
U1 = np.uint64(1)


@_maybe_jit
def _popcount(x):
    x = np.uint64(x)
    count = 0
    while x != U0:
        x &= x - U1
        count += 1
    return count


@_maybe_jit
def _ejr_plus_impl(approves, sat, in_comm, n, m, k):
    """Scan for an unselected candidate approved by a quota of voters who
    all hold fewer than ell committee seats.  Returns [found, cand, ell]."""
    out = np.full(3, -1, dtype=np.int64)
    counts = np.zeros(k + 2, dtype=np.int64)
    for c in range(m):
        if in_comm[c]:
            continue
        for s in range(k + 2):
            counts[s] = 0
        for i in range(n):
            if approves[i, c]:
                s = sat[i]
                if s > k:
                    s = k
                counts[s + 1] += 1
        below = 0
        for ell in range(1, k + 1):
            below += counts[ell]
            if below * k >= ell * n:
                out[0] = 1
                out[1] = c
                out[2] = ell
                return out
    out[0] = 0
    return out


@_maybe_jit
def _pjr_plus_impl(approves, wmask, in_comm, wsize, n, m, k):
    """Scan for an unselected candidate with a quota-sized approver group
    whose committee approvals all fit inside a set smaller than their
    entitlement.  Returns [found, cand, xmask]."""
    out = np.full(3, -1, dtype=np.int64)
    size = 1 << wsize
    counts = np.zeros(size, dtype=np.int64)
    pop = np.zeros(size, dtype=np.int64)
    for x in range(1, size):
        pop[x] = pop[x >> 1] + (x & 1)
    for c in range(m):
        if in_comm[c]:
            continue
        any_approver = False
        for x in range(size):
            counts[x] = 0
        for i in range(n):
            if approves[i, c]:
                counts[wmask[i]] += 1
                any_approver = True
        if not any_approver:
            continue
        for b in range(wsize):
            step = 1 << b
            for x in range(size):
                if x & step:
                    counts[x] += counts[x ^ step]
        for x in range(size):
            ell = pop[x] + 1
            if ell <= k and counts[x] * k >= ell * n:
                out[0] = 1
                out[1] = c
                out[2] = x
                return out
    out[0] = 0
    return out


@_maybe_jit
def _cohesive_dfs_impl(cand_words, order, base, words, target, quota, budget, chosen):
    """Search for ``target`` candidates commonly approved by >= quota voters
    of ``base``.  ``budget`` is a 1-element node counter decremented in
    place.  Returns 1 found (``chosen`` filled), 0 exhausted, 2 overrun."""
    m = order.shape[0]
    sup = np.zeros((target + 1, words), dtype=np.uint64)
    for t in range(words):
        sup[0, t] = base[t]
    idx = np.zeros(target + 1, dtype=np.int64)
    depth = 0
    while depth >= 0:
        advanced = False
        while idx[depth] < m:
            if m - idx[depth] < target - depth:
                break
            c = order[idx[depth]]
            idx[depth] += 1
            budget[0] -= 1
            if budget[0] < 0:
                return 2
            cnt = 0
            for t in range(words):
                v = sup[depth, t] & cand_words[c, t]
                sup[depth + 1, t] = v
                cnt += _popcount(v)
            if cnt < quota:
                continue
            chosen[depth] = c
            if depth + 1 == target:
                return 1
            idx[depth + 1] = idx[depth]
            depth += 1
            advanced = True
            break
        if not advanced:
            depth -= 1
    return 0


@_maybe_jit
def _ejr_impl(cand_words, sat, n, m, k, words, budget, chosen):
    """EJR search: per entitlement ell, look for ell commonly approved
    candidates among a quota of voters all below ell seats.
    Returns [status, ell] with status 1 violated / 0 satisfied / 2 budget."""
    out = np.zeros(2, dtype=np.int64)
    base = np.zeros(words, dtype=np.uint64)
    support_count = np.zeros(m, dtype=np.int64)
    for ell in range(1, k + 1):
        for t in range(words):
            base[t] = U0
        eligible = 0
        for i in range(n):
            if sat[i] < ell:
                base[i >> 6] |= U1 << np.uint64(i & 63)
                eligible += 1
        quota = -((-ell * n) // k)
        if eligible < quota:
            continue
        for c in range(m):
            cnt = 0
            for t in range(words):
                cnt += _popcount(base[t] & cand_words[c, t])
            support_count[c] = cnt
        order = np.argsort(support_count * np.int64(-(m + 1)) + np.arange(m))
        status = _cohesive_dfs_impl(
            cand_words, order, base, words, ell, quota, budget, chosen
        )
        if status == 2:
            out[0] = 2
            return out
        if status == 1:
            out[0] = 1
            out[1] = ell
            return out
    out[0] = 0
    return out


@_maybe_jit
def _pjr_impl(cand_words, wmask, wsize, n, m, k, words, budget, chosen):
    """PJR search over committee subsets.  Returns [status, xmask, target]."""
    out = np.zeros(3, dtype=np.int64)
    size = 1 << wsize
    pop = np.zeros(size, dtype=np.int64)
    for x in range(1, size):
        pop[x] = pop[x >> 1] + (x & 1)
    xorder = np.argsort(pop * np.int64(size) + np.arange(size))
    base = np.zeros(words, dtype=np.uint64)
    support_count = np.zeros(m, dtype=np.int64)
    for xi in range(size):
        x = xorder[xi]
        target = pop[x] + 1
        if target > k:
            continue
        for t in range(words):
            base[t] = U0
        eligible = 0
        for i in range(n):
            if wmask[i] & ~x == 0:
                base[i >> 6] |= U1 << np.uint64(i & 63)
                eligible += 1
        quota = -((-target * n) // k)
        if eligible < quota:
            continue
        for c in range(m):
            cnt = 0
            for t in range(words):
                cnt += _popcount(base[t] & cand_words[c, t])
            support_count[c] = cnt
        order = np.argsort(support_count * np.int64(-(m + 1)) + np.arange(m))
        status = _cohesive_dfs_impl(
            cand_words, order, base, words, target, quota, budget, chosen
        )
        if status == 2:
            out[0] = 2
            return out
        if status == 1:
            out[0] = 1
            out[1] = x
            out[2] = target
            return out
    out[0] = 0
    return out


@_maybe_jit
def _psc_impl(rank_mat, wmask_c, n, m, k):
    """PSC on strict profiles: group top-t prefixes (as candidate masks) and
    test each quota.  Returns 1 when violated, else 0."""
    total = 0
    for i in range(n):
        for c in range(m):
            if rank_mat[i, c] <= m:
                total += 1
    masks = np.zeros(total + 1, dtype=np.uint64)
    at = 0
    for i in range(n):
        row_order = np.argsort(rank_mat[i])
        mask = U0
        for pos in range(m):
            c = row_order[pos]
            if rank_mat[i, c] > m:
                break
            mask |= U1 << np.uint64(c)
            masks[at] = mask
            at += 1
    full = U0
    for c in range(m):
        full |= U1 << np.uint64(c)
    masks[at] = full
    at += 1
    masks = np.sort(masks[:at])
    i = 0
    while i < at:
        j = i
        while j < at and masks[j] == masks[i]:
            j += 1
        count = j - i
        mask = masks[i]
        if mask == full:
            count = n  # the whole electorate is vacuously solid over C
        ell = count * k // n
        msize = _popcount(mask)
        if ell > msize:
            ell = msize
        if ell > _popcount(mask & wmask_c):
            return 1
        i = j
    return 0


@_maybe_jit
def _rank_ejr_plus_impl(rank_mat, in_comm, n, m, k, max_rank):
    """Rank-lifted EJR+ scan; returns [found, rank, cand, ell]."""
    out = np.full(4, -1, dtype=np.int64)
    sat = np.zeros(n, dtype=np.int64)
    approves = np.zeros((n, m), dtype=np.bool_)
    counts = np.zeros(k + 2, dtype=np.int64)
    for r in range(1, max_rank + 1):
        for i in range(n):
            for c in range(m):
                if rank_mat[i, c] == r:
                    approves[i, c] = True
                    if in_comm[c]:
                        sat[i] += 1
        for c in range(m):
            if in_comm[c]:
                continue
            for s in range(k + 2):
                counts[s] = 0
            for i in range(n):
                if approves[i, c]:
                    s = sat[i]
                    if s > k:
                        s = k
                    counts[s + 1] += 1
            below = 0
            for ell in range(1, k + 1):
                below += counts[ell]
                if below * k >= ell * n:
                    out[0] = 1
                    out[1] = r
                    out[2] = c
                    out[3] = ell
                    return out
    out[0] = 0
    return out


@_maybe_jit
def _rank_pjr_plus_impl(rank_mat, in_comm, wlist, n, m, k, max_rank):
    """Rank-lifted PJR+ scan; returns [found, rank, cand, xmask]."""
    out = np.full(4, -1, dtype=np.int64)
    wsize = wlist.shape[0]
    size = 1 << wsize
    pop = np.zeros(size, dtype=np.int64)
    for x in range(1, size):
        pop[x] = pop[x >> 1] + (x & 1)
    wmask = np.zeros(n, dtype=np.int64)
    approves = np.zeros((n, m), dtype=np.bool_)
    counts = np.zeros(size, dtype=np.int64)
    for r in range(1, max_rank + 1):
        for i in range(n):
            for c in range(m):
                if rank_mat[i, c] == r:
                    approves[i, c] = True
            for pos in range(wsize):
                if rank_mat[i, wlist[pos]] == r:
                    wmask[i] |= 1 << pos
        for c in range(m):
            if in_comm[c]:
                continue
            any_approver = False
            for x in range(size):
                counts[x] = 0
            for i in range(n):
                if approves[i, c]:
                    counts[wmask[i]] += 1
                    any_approver = True
            if not any_approver:
                continue
            for b in range(wsize):
                step = 1 << b
                for x in range(size):
                    if x & step:
                        counts[x] += counts[x ^ step]
            for x in range(size):
                ell = pop[x] + 1
                if ell <= k and counts[x] * k >= ell * n:
                    out[0] = 1
                    out[1] = r
                    out[2] = c
                    out[3] = x
                    return out
    out[0] = 0
    return out


@_maybe_jit
def _gpsc_impl(rank_mat, wlist, n, m, k, inclusion):
    """Exhaustive scan over candidate subsets for the solid-coalition
    axioms on weak orders.  Returns [found, candidate-set bits, xmask]."""
    out = np.full(3, -1, dtype=np.int64)
    wsize = wlist.shape[0]
    size = 1 << wsize
    pop = np.zeros(size, dtype=np.int64)
    for x in range(1, size):
        pop[x] = pop[x >> 1] + (x & 1)
    counts = np.zeros(size, dtype=np.int64)
    inf = m + 1
    in_committee = np.zeros(m, dtype=np.bool_)
    for pos in range(wsize):
        in_committee[wlist[pos]] = True
    for bits in range(1, 1 << m):
        if inclusion:
            outside_committee = False
            for c in range(m):
                if bits >> c & 1 and not in_committee[c]:
                    outside_committee = True
                    break
            if not outside_committee:
                continue
        csize = 0
        for c in range(m):
            if bits >> c & 1:
                csize += 1
        for x in range(size):
            counts[x] = 0
        members = 0
        for i in range(n):
            max_in = 0
            for c in range(m):
                if bits >> c & 1 and rank_mat[i, c] > max_in:
                    max_in = rank_mat[i, c]
            min_out = inf + 1
            for c in range(m):
                if not bits >> c & 1 and rank_mat[i, c] < min_out:
                    min_out = rank_mat[i, c]
            if max_in > min_out:
                continue
            members += 1
            mask = 0
            for pos in range(wsize):
                if rank_mat[i, wlist[pos]] <= max_in:
                    mask |= 1 << pos
            counts[mask] += 1
        if members == 0:
            continue
        for b in range(wsize):
            step = 1 << b
            for x in range(size):
                if x & step:
                    counts[x] += counts[x ^ step]
        for x in range(size):
            ell = pop[x] + 1
            if ell > k:
                continue
            if not inclusion and ell > csize:
                continue
            if counts[x] * k >= ell * n:
                out[0] = 1
                out[1] = bits
                out[2] = x
                return out
    out[0] = 0
    return out


# ---------------------------------------------------------------------------
# instance-level access


class FastInstance:
    """Array view of an instance for repeated committee queries.

    Conversion costs are paid once; every check then runs as a compiled
    kernel (or its plain-numpy twin when numba is off).
    """

    def __init__(self, instance: Instance):
        profile = instance.profile
        self.instance = instance
        self.n, self.m, self.k = instance.n, instance.m, instance.k
        if self.m > 63:
            raise ScaleGuardError("fast kernels support at most 63 candidates")
        n, m = self.n, self.m
        self.approves = np.zeros((n, m), dtype=np.bool_)
        self.rank_mat = np.full((n, m), m + 1, dtype=np.int64)
        for i, ballot in enumerate(profile.ranks):
            if ballot:
                cands = np.fromiter(ballot.keys(), dtype=np.int64, count=len(ballot))
                ranks = np.fromiter(ballot.values(), dtype=np.int64, count=len(ballot))
                self.approves[i, cands] = True
                self.rank_mat[i, cands] = ranks
        self.max_rank = profile.max_rank
        self.words = (n + 63) // 64
        self.cand_words = np.zeros((m, self.words), dtype=np.uint64)
        powers = U1 << np.arange(64, dtype=np.uint64)
        for word in range(self.words):
            rows = self.approves[word * 64 : (word + 1) * 64]
            weights = powers[: rows.shape[0]]
            self.cand_words[:, word] = (rows * weights[:, None]).sum(
                axis=0, dtype=np.uint64
            )

    def _committee(self, committee):
        if len(committee) > 20:
            raise ScaleGuardError("fast kernels support committees of at most 20")
        in_comm = np.zeros(self.m, dtype=np.bool_)
        wlist = np.array(sorted(committee), dtype=np.int64)
        if len(wlist):
            in_comm[wlist] = True
        return in_comm, wlist

    def _sat(self, wlist):
        if len(wlist) == 0:
            return np.zeros(self.n, dtype=np.int64)
        return self.approves[:, wlist].sum(axis=1).astype(np.int64)

    def _wmask(self, wlist):
        wmask = np.zeros(self.n, dtype=np.int64)
        for pos in range(len(wlist)):
            wmask |= self.approves[:, wlist[pos]].astype(np.int64) << pos
        return wmask

    def ejr_plus(self, committee) -> bool:
        in_comm, wlist = self._committee(committee)
        out = _ejr_plus_impl(
            self.approves, self._sat(wlist), in_comm, self.n, self.m, self.k
        )
        return out[0] == 0

    def pjr_plus(self, committee) -> bool:
        in_comm, wlist = self._committee(committee)
        out = _pjr_plus_impl(
            self.approves,
            self._wmask(wlist),
            in_comm,
            len(wlist),
            self.n,
            self.m,
            self.k,
        )
        return out[0] == 0

    def ejr(self, committee, node_budget: int = 20_000_000) -> bool:
        _in_comm, wlist = self._committee(committee)
        budget = np.array([node_budget], dtype=np.int64)
        chosen = np.zeros(self.k + 1, dtype=np.int64)
        out = _ejr_impl(
            self.cand_words,
            self._sat(wlist),
            self.n,
            self.m,
            self.k,
            self.words,
            budget,
            chosen,
        )
        if out[0] == 2:
            raise ScaleGuardError("EJR kernel budget exhausted")
        return out[0] == 0

    def pjr(self, committee, node_budget: int = 20_000_000) -> bool:
        _in_comm, wlist = self._committee(committee)
        budget = np.array([node_budget], dtype=np.int64)
        chosen = np.zeros(self.k + 1, dtype=np.int64)
        out = _pjr_impl(
            self.cand_words,
            self._wmask(wlist),
            len(wlist),
            self.n,
            self.m,
            self.k,
            self.words,
            budget,
            chosen,
        )
        if out[0] == 2:
            raise ScaleGuardError("PJR kernel budget exhausted")
        return out[0] == 0

    def psc(self, committee) -> bool:
        wmask_c = U0
        for c in committee:
            wmask_c |= U1 << np.uint64(c)
        return _psc_impl(self.rank_mat, wmask_c, self.n, self.m, self.k) == 0

    def rank_ejr_plus(self, committee) -> bool:
        in_comm, _wlist = self._committee(committee)
        out = _rank_ejr_plus_impl(
            self.rank_mat, in_comm, self.n, self.m, self.k, self.max_rank
        )
        return out[0] == 0

    def rank_pjr_plus(self, committee) -> bool:
        in_comm, wlist = self._committee(committee)
        out = _rank_pjr_plus_impl(
            self.rank_mat, in_comm, wlist, self.n, self.m, self.k, self.max_rank
        )
        return out[0] == 0


def ejr_plus_check(instance: Instance, committee: frozenset) -> bool:
    return FastInstance(instance).ejr_plus(committee)


def pjr_plus_check(instance: Instance, committee: frozenset) -> bool:
    return FastInstance(instance).pjr_plus(committee)


def ejr_check(
    instance: Instance, committee: frozenset, node_budget: int = 20_000_000
) -> bool:
    return FastInstance(instance).ejr(committee, node_budget)


def pjr_check(
    instance: Instance, committee: frozenset, node_budget: int = 20_000_000
) -> bool:
    return FastInstance(instance).pjr(committee, node_budget)


def psc_check(instance: Instance, committee: frozenset) -> bool:
    return FastInstance(instance).psc(committee)


def rank_ejr_plus_check(instance: Instance, committee: frozenset) -> bool:
    return FastInstance(instance).rank_ejr_plus(committee)


def rank_pjr_plus_check(instance: Instance, committee: frozenset) -> bool:
    return FastInstance(instance).rank_pjr_plus(committee)


def gpsc_scan(instance: Instance, committee: frozenset, inclusion: bool):
    """Raw exhaustive solid-coalition scan; returns None (satisfied) or the
    (candidate_set, ell, committee-subset mask) triple of a violation."""
    fast = FastInstance(instance)
    _in_comm, wlist = fast._committee(committee)
    out = _gpsc_impl(fast.rank_mat, wlist, fast.n, fast.m, fast.k, inclusion)
    if out[0] == 0:
        return None
    bits, x = int(out[1]), int(out[2])
    cand_set = frozenset(c for c in range(fast.m) if bits >> c & 1)
    ell = bin(x).count("1") + 1
    return cand_set, ell, x
