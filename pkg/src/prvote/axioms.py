"""Verifiers for proportionality axioms, each returning a violation witness.

Every checker takes an :class:`~prvote.core.Instance` and a committee
(a set of candidate ids) and returns ``None`` when the axiom holds or a
:class:`Witness` describing one violation.  Witnesses are self-checking:
:meth:`Witness.replay` re-evaluates the defining inequality from scratch.

All quota comparisons ``|group| >= ell * n / k`` are carried out as exact
integer cross-multiplications; there is no floating point anywhere.

The polynomial checkers follow the published verification algorithms
(counting for EJR+, coverage-minus-modular minimization via min-cut for
PJR+, prefix-coalition grouping for PSC).  The coNP-hard axioms (EJR, PJR,
generalized PSC, inclusion PSC) get exhaustive desk-scale checkers behind
work guards.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

from prvote.core import Instance, ScaleGuardError, rank_expand
from prvote.exactmath import min_coverage_minus_modular, rat

__all__ = [
    "Witness",
    "ScaleGuardError",
    "check_ejr_plus",
    "check_pjr_plus",
    "check_ejr_brute",
    "check_pjr_brute",
    "check_psc",
    "check_gpsc_brute",
    "check_ipsc_brute",
    "check_rank_lifted",
    "check_representative",
    "CHECKERS",
]


@dataclass(frozen=True)
class Witness:
    """Certificate of an axiom violation.

    Depending on the axiom, the certificate names a single unselected
    candidate, a candidate set (cohesion set or solidly supported set), a
    rank at which a lifted check fails, the voter group, and the seat
    entitlement ``ell``.  ``value`` carries the exact coverage-deficit value
    for min-cut witnesses and the offending average for representativeness.
    """

    kind: str
    voters: frozenset
    ell: int | None = None
    candidate: int | None = None
    rank: int | None = None
    candidate_set: frozenset | None = None
    value: object = None

    def to_dict(self, names=None) -> dict:
        from prvote.core import candidate_name
        from prvote.exactmath import format_rational

        data: dict = {"axiom": self.kind, "voters": sorted(self.voters)}
        if self.ell is not None:
            data["ell"] = self.ell
        if self.candidate is not None:
            data["candidate"] = candidate_name(self.candidate, names)
            data["candidate_index"] = self.candidate
        if self.rank is not None:
            data["rank"] = self.rank
        if self.candidate_set is not None:
            data["candidate_set"] = [
                candidate_name(c, names) for c in sorted(self.candidate_set)
            ]
        if self.value is not None:
            data["value"] = format_rational(self.value)
        return data

    def replay(self, instance: Instance, committee: frozenset, f_table=None) -> bool:
        """Re-derive the violation from the definition; True iff it holds up."""
        profile, n, k = instance.profile, instance.n, instance.k
        approvals = profile.approval_sets
        group = self.voters
        size = len(group)

        if self.kind in ("rank-pjr+", "rank-ejr+", "rank-pjr"):
            base = {
                "rank-pjr+": "pjr+",
                "rank-ejr+": "ejr+",
                "rank-pjr": "pjr",
            }[self.kind]
            inner = Witness(
                base,
                self.voters,
                self.ell,
                self.candidate,
                None,
                self.candidate_set,
                self.value,
            )
            expanded = Instance(rank_expand(profile, self.rank), k)
            return inner.replay(expanded, committee)

        if self.kind == "ejr+":
            c, ell = self.candidate, self.ell
            return (
                c not in committee
                and size * k >= ell * n
                and all(c in approvals[i] for i in group)
                and all(len(approvals[i] & committee) < ell for i in group)
            )
        if self.kind == "pjr+":
            c = self.candidate
            union_w = set().union(*(approvals[i] & committee for i in group))
            return (
                c not in committee
                and all(c in approvals[i] for i in group)
                and n * len(union_w) - k * size <= -n
            )
        if self.kind == "ejr":
            cset, ell = self.candidate_set, self.ell
            return (
                len(cset) >= ell
                and size * k >= ell * n
                and all(cset <= approvals[i] for i in group)
                and all(len(approvals[i] & committee) < ell for i in group)
            )
        if self.kind == "pjr":
            cset, ell = self.candidate_set, self.ell
            union_w = set().union(*(approvals[i] & committee for i in group))
            return (
                len(cset) >= ell
                and size * k >= ell * n
                and all(cset <= approvals[i] for i in group)
                and len(union_w) < ell
            )
        if self.kind == "psc":
            cset, ell = self.candidate_set, self.ell
            return (
                size * k >= ell * n
                and all(_solid_strict(profile, i, cset) for i in group)
                and len(cset & committee) < min(len(cset), ell)
            )
        if self.kind in ("gpsc", "ipsc"):
            cset, ell = self.candidate_set, self.ell
            if not all(_solid_weak(profile, i, cset) for i in group):
                return False
            if size * k < ell * n:
                return False
            contour_w = _upper_contour(profile, group, cset) & committee
            if self.kind == "gpsc":
                return len(contour_w) < min(ell, len(cset))
            return not cset <= committee and len(contour_w) < ell
        if self.kind == "representative":
            c, ell = self.candidate, self.ell
            if f_table is None:
                raise ValueError("replaying a representativeness witness needs f")
            total = sum(len(approvals[i] & committee) for i in group)
            return (
                c not in committee
                and size * k >= ell * n
                and all(c in approvals[i] for i in group)
                and rat(total, size) < rat(f_table[ell])
            )
        raise ValueError(f"cannot replay witness kind {self.kind!r}")


def _require_dichotomous(instance: Instance):
    if not instance.profile.is_dichotomous:
        raise ValueError("this axiom is defined for approval (dichotomous) profiles")


def _solid_strict(profile, voter, cand_set) -> bool:
    ranks = profile.ranks[voter]
    outside = [c for c in range(profile.m) if c not in cand_set]
    if not outside:
        return True
    if not cand_set <= set(ranks):
        return False
    max_in = max(ranks[c] for c in cand_set)
    min_out = min((ranks[c] for c in outside if c in ranks), default=profile.m + 1)
    return max_in < min_out


def _solid_weak(profile, voter, cand_set) -> bool:
    ranks = profile.ranks[voter]
    inf = profile.m + 1
    max_in = max((ranks.get(c, inf) for c in cand_set), default=0)
    outside = (c for c in range(profile.m) if c not in cand_set)
    min_out = min((ranks.get(c, inf) for c in outside), default=inf)
    return max_in <= min_out


def _upper_contour(profile, group, cand_set) -> set:
    inf = profile.m + 1
    contour = set()
    for voter in group:
        ranks = profile.ranks[voter]
        worst = max((ranks.get(c, inf) for c in cand_set), default=0)
        if worst >= inf:
            contour.update(range(profile.m))
        else:
            contour.update(c for c, r in ranks.items() if r <= worst)
    return contour


# ---------------------------------------------------------------------------
# polynomial checkers


def check_ejr_plus(instance: Instance, committee: frozenset) -> Witness | None:
    """EJR+: no unselected candidate approved by ``ell * n / k`` voters who
    each approve fewer than ``ell`` committee members.  O(m * k * n)."""
    _require_dichotomous(instance)
    profile, n, k = instance.profile, instance.n, instance.k
    approvals = profile.approval_sets
    sat = [len(a & committee) for a in approvals]
    for cand in range(instance.m):
        if cand in committee:
            continue
        approver_sat = sorted(sat[i] for i in range(n) if cand in approvals[i])
        # voters with sat < ell form a prefix of the sorted list
        below = 0
        for ell in range(1, k + 1):
            while below < len(approver_sat) and approver_sat[below] < ell:
                below += 1
            if below * k >= ell * n:
                group = frozenset(
                    i for i in range(n) if cand in approvals[i] and sat[i] < ell
                )
                return Witness("ejr+", group, ell=ell, candidate=cand)
    return None


def check_pjr_plus(instance: Instance, committee: frozenset) -> Witness | None:
    """PJR+ (equivalently inclusion-PSC on approval ballots).

    For each unselected candidate ``c``, minimizes
    ``|union of committee approvals| - |group| * k / n`` over groups of
    approvers of ``c`` via the exact min-cut reduction; a minimum of -1 or
    less certifies a violation.
    """
    _require_dichotomous(instance)
    profile, n, k = instance.profile, instance.n, instance.k
    approvals = profile.approval_sets
    alpha = rat(k, n)
    for cand in range(instance.m):
        if cand in committee:
            continue
        ground = sorted(profile.approvers(cand))
        if not ground:
            continue
        items = {i: approvals[i] & committee for i in ground}
        weights = {c: 1 for c in committee}
        value, argmin = min_coverage_minus_modular(items, weights, alpha)
        if value <= -1:
            ell = len(argmin) * k // n
            return Witness(
                "pjr+", frozenset(argmin), ell=ell, candidate=cand, value=value
            )
    return None


def check_psc(instance: Instance, committee: frozenset) -> Witness | None:
    """PSC on strict profiles via prefix coalitions.

    On strict ballots a solidly supported set is either some voter's
    top-``t`` prefix or the whole candidate set, so grouping voters by
    prefix sets enumerates every solid coalition in O(n^2 m).
    """
    profile, n, k, m = instance.profile, instance.n, instance.k, instance.m
    if not profile.is_strict:
        raise ValueError("PSC is defined for strict profiles")
    supporters: dict[frozenset, list] = {}
    for voter, ballot in enumerate(profile.ranks):
        by_rank = sorted(ballot, key=ballot.__getitem__)
        prefix: set = set()
        for cand in by_rank:
            prefix.add(cand)
            supporters.setdefault(frozenset(prefix), []).append(voter)
    supporters[frozenset(range(m))] = list(range(n))
    for cand_set in sorted(supporters, key=lambda s: (len(s), sorted(s))):
        group = supporters[cand_set]
        ell_max = len(group) * k // n
        if min(ell_max, len(cand_set)) > len(cand_set & committee):
            return Witness(
                "psc",
                frozenset(group),
                ell=ell_max,
                candidate_set=cand_set,
            )
    return None


def check_representative(
    instance: Instance, committee: frozenset, f_table: Mapping
) -> Witness | None:
    """Average-representation guarantee: for every unselected candidate and
    every ``ell``, the ``ceil(ell n / k)`` approvers with the fewest approved
    committee members must average at least ``f(ell)``."""
    _require_dichotomous(instance)
    profile, n, k = instance.profile, instance.n, instance.k
    approvals = profile.approval_sets
    sat = [len(a & committee) for a in approvals]
    for cand in range(instance.m):
        if cand in committee:
            continue
        approvers = sorted(
            (i for i in range(n) if cand in approvals[i]),
            key=lambda i: (sat[i], i),
        )
        for ell in range(1, k + 1):
            quota = -(-ell * n // k)  # ceil
            if len(approvers) < quota:
                break
            group = approvers[:quota]
            total = sum(sat[i] for i in group)
            threshold = rat(f_table[ell])
            if rat(total, quota) < threshold:
                return Witness(
                    "representative",
                    frozenset(group),
                    ell=ell,
                    candidate=cand,
                    value=rat(total, quota),
                )
    return None


# ---------------------------------------------------------------------------
# brute-force checkers for the coNP-hard axioms


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _cohesive_dfs(cand_voters, order, support, target, quota, budget):
    """Depth-first search for ``target`` candidates commonly approved by at
    least ``quota`` voters of ``support`` (bitmask).  Returns (set, mask) or
    None; decrements ``budget`` (a one-element list) per node."""
    stack = [(support, 0, ())]
    while stack:
        sup, start, chosen = stack.pop()
        for idx in range(start, len(order)):
            if len(order) - idx < target - len(chosen):
                break
            budget[0] -= 1
            if budget[0] < 0:
                raise ScaleGuardError("cohesive-group search budget exhausted")
            cand = order[idx]
            new_sup = sup & cand_voters[cand]
            if _popcount(new_sup) < quota:
                continue
            new_chosen = chosen + (cand,)
            if len(new_chosen) == target:
                return new_chosen, new_sup
            stack.append((new_sup, idx + 1, new_chosen))
    return None


def check_ejr_brute(
    instance: Instance, committee: frozenset, max_nodes: int = 2_000_000
) -> Witness | None:
    """EJR by exhaustive cohesive-group search.

    For each ``ell``, restricts to voters approving fewer than ``ell``
    committee members and searches for ``ell`` candidates commonly approved
    by a quota-sized subset (candidate-subset DFS with support pruning).
    Raises :class:`ScaleGuardError` when the node budget runs out.
    """
    _require_dichotomous(instance)
    profile, n, k, m = instance.profile, instance.n, instance.k, instance.m
    approvals = profile.approval_sets
    sat = [len(a & committee) for a in approvals]
    cand_voters = [0] * m
    for i, a in enumerate(approvals):
        for c in a:
            cand_voters[c] |= 1 << i
    budget = [max_nodes]
    for ell in range(1, k + 1):
        support = 0
        for i in range(n):
            if sat[i] < ell:
                support |= 1 << i
        quota = -(-ell * n // k)
        if _popcount(support) < quota:
            continue
        order = sorted(
            range(m),
            key=lambda c: (-_popcount(cand_voters[c] & support), c),
        )
        found = _cohesive_dfs(cand_voters, order, support, ell, quota, budget)
        if found:
            cset, sup = found
            group = frozenset(i for i in range(n) if sup >> i & 1)
            return Witness(
                "ejr", group, ell=ell, candidate_set=frozenset(cset)
            )
    return None


def check_pjr_brute(
    instance: Instance, committee: frozenset, max_nodes: int = 2_000_000
) -> Witness | None:
    """PJR by exhaustive search over committee subsets.

    A violation pins the group's committee coverage inside some ``X``
    strictly smaller than ``ell``; enumerating ``X`` over committee subsets
    and searching for ``|X| + 1`` commonly approved candidates among voters
    whose committee approvals lie inside ``X`` is exhaustive.
    """
    _require_dichotomous(instance)
    profile, n, k, m = instance.profile, instance.n, instance.k, instance.m
    if len(committee) > 20:
        raise ScaleGuardError("PJR brute force needs |committee| <= 20")
    approvals = profile.approval_sets
    wlist = sorted(committee)
    wmask = []
    for a in approvals:
        mask = 0
        for pos, c in enumerate(wlist):
            if c in a:
                mask |= 1 << pos
        wmask.append(mask)
    cand_voters = [0] * m
    for i, a in enumerate(approvals):
        for c in a:
            cand_voters[c] |= 1 << i
    budget = [max_nodes]
    subsets = sorted(range(1 << len(wlist)), key=lambda x: (_popcount(x), x))
    for x in subsets:
        target = _popcount(x) + 1
        if target > k:
            continue
        support = 0
        for i in range(n):
            if wmask[i] & ~x == 0:
                support |= 1 << i
        quota = -(-target * n // k)
        if _popcount(support) < quota:
            continue
        order = sorted(
            range(m),
            key=lambda c: (-_popcount(cand_voters[c] & support), c),
        )
        found = _cohesive_dfs(cand_voters, order, support, target, quota, budget)
        if found:
            cset, sup = found
            group = frozenset(i for i in range(n) if sup >> i & 1)
            return Witness(
                "pjr", group, ell=target, candidate_set=frozenset(cset)
            )
    return None


def _scan_to_witness(instance, committee, found, kind):
    """Rebuild the voter group for a raw solid-coalition scan hit: solid
    supporters whose contour inside the committee stays within the mask."""
    cand_set, ell, x = found
    profile = instance.profile
    wlist = sorted(committee)
    inf = profile.m + 1
    group = []
    for i in range(instance.n):
        if not _solid_weak(profile, i, cand_set):
            continue
        worst = max(profile.ranks[i].get(c, inf) for c in cand_set)
        mask = 0
        for pos, c in enumerate(wlist):
            if profile.ranks[i].get(c, inf) <= worst:
                mask |= 1 << pos
        if mask & ~x == 0:
            group.append(i)
    return Witness(kind, frozenset(group), ell=ell, candidate_set=cand_set)


def check_gpsc_brute(
    instance: Instance, committee: frozenset, max_m: int = 18
) -> Witness | None:
    """Generalized PSC by exhaustive candidate-subset enumeration.

    Every candidate subset is scanned for solid supporters who can pin the
    committee part of their upper contour inside a set smaller than both
    their entitlement and the subset itself.  Exponential in m, hence the
    guard.
    """
    if instance.m > max_m:
        raise ScaleGuardError(f"generalized-PSC brute force needs m <= {max_m}")
    from prvote import kernels

    found = kernels.gpsc_scan(instance, committee, inclusion=False)
    if found is None:
        return None
    return _scan_to_witness(instance, committee, found, "gpsc")


def check_ipsc_brute(
    instance: Instance, committee: frozenset, max_m: int = 18
) -> Witness | None:
    """Inclusion PSC by exhaustive candidate-subset enumeration (same scan
    as :func:`check_gpsc_brute` with the containment escape)."""
    if instance.m > max_m:
        raise ScaleGuardError(f"inclusion-PSC brute force needs m <= {max_m}")
    from prvote import kernels

    found = kernels.gpsc_scan(instance, committee, inclusion=True)
    if found is None:
        return None
    return _scan_to_witness(instance, committee, found, "ipsc")


# ---------------------------------------------------------------------------
# rank-lifted checks


_BASES: dict[str, Callable] = {}


def check_rank_lifted(
    instance: Instance, committee: frozenset, base: str = "pjr+"
) -> Witness | None:
    """Run an approval axiom on every rank expansion of a weak profile.

    ``base`` is one of ``"pjr+"``, ``"ejr+"``, ``"pjr"``.  Expansion stops at
    the profile's largest finite rank (later expansions are identical).
    Returns the witness of the smallest failing rank.
    """
    if base not in ("pjr+", "ejr+", "pjr"):
        raise ValueError(f"unsupported base axiom {base!r}")
    profile, k = instance.profile, instance.k
    for r in range(1, profile.max_rank + 1):
        expanded = Instance(rank_expand(profile, r), k)
        if base == "pjr+":
            witness = check_pjr_plus(expanded, committee)
        elif base == "ejr+":
            witness = check_ejr_plus(expanded, committee)
        else:
            witness = check_pjr_brute(expanded, committee)
        if witness is not None:
            return Witness(
                f"rank-{base}",
                witness.voters,
                ell=witness.ell,
                candidate=witness.candidate,
                rank=r,
                candidate_set=witness.candidate_set,
                value=witness.value,
            )
    return None


CHECKERS: dict[str, Callable] = {
    "ejr+": check_ejr_plus,
    "pjr+": check_pjr_plus,
    "ejr": check_ejr_brute,
    "pjr": check_pjr_brute,
    "psc": check_psc,
    "gpsc": check_gpsc_brute,
    "ipsc": check_ipsc_brute,
    "rank-pjr+": lambda inst, com: check_rank_lifted(inst, com, "pjr+"),
    "rank-ejr+": lambda inst, com: check_rank_lifted(inst, com, "ejr+"),
    "rank-pjr": lambda inst, com: check_rank_lifted(inst, com, "pjr"),
}
