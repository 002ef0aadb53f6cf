"""Committee election rules over exact rational budgets.

All rules are deterministic given a tie-breaking policy and return an
:class:`ElectionResult` carrying the committee plus a structured trace
(selections, payments, eliminations) that downstream certification and the
committee-monotonicity construction consume.

Budget-based rules (expanding approvals, equal shares, STV, Phragmen) keep
per-voter budgets as exact rationals; each elected candidate is paid for
with total price exactly 1 and nobody's budget goes negative.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence

from prvote.axioms import ScaleGuardError
from prvote.core import Instance, WeakProfile
from prvote.exactmath import rat

__all__ = [
    "TieBreak",
    "ElectionResult",
    "gjcr",
    "ear",
    "mes_approval",
    "stv",
    "pav_exact",
    "ls_pav",
    "seq_phragmen",
    "ejrp_monotone_pair",
    "RULES",
]


class TieBreak:
    """Deterministic candidate tie-breaking: lexicographic by id, or an
    explicit priority list (earlier entries win)."""

    def __init__(self, priority: Sequence[int] | None = None, m: int | None = None):
        if priority is None:
            self._key = {}
        else:
            priority = list(priority)
            if m is not None and sorted(priority) != list(range(m)):
                raise ValueError("priority list must be a permutation of all candidates")
            self._key = {c: i for i, c in enumerate(priority)}

    @staticmethod
    def lex() -> "TieBreak":
        return TieBreak()

    def key(self, cand: int):
        return (self._key.get(cand, len(self._key)), cand)

    def pick(self, candidates: Iterable[int]) -> int:
        return min(candidates, key=self.key)


@dataclass(frozen=True)
class ElectionResult:
    rule: str
    committee: frozenset
    trace: tuple

    def payments(self) -> dict:
        """Aggregate spend log as a ``(voter, candidate) -> amount`` map."""
        paid: dict = {}
        for event in self.trace:
            if event.get("type") == "select" and "payments" in event:
                cand = event["candidate"]
                for voter, amount in event["payments"].items():
                    key = (voter, cand)
                    paid[key] = paid.get(key, rat(0)) + amount
        return paid

    def trace_dicts(self) -> list:
        from prvote.exactmath import format_rational

        out = []
        for event in self.trace:
            item = dict(event)
            if "payments" in item:
                item["payments"] = {
                    str(v): format_rational(p) for v, p in sorted(item["payments"].items())
                }
            for key in ("price", "load", "support"):
                if key in item:
                    item[key] = format_rational(item[key])
            out.append(item)
        return out


def _require_dichotomous(instance: Instance):
    if not instance.profile.is_dichotomous:
        raise ValueError("this rule requires approval (dichotomous) ballots")


def gjcr(instance: Instance, tiebreak: TieBreak | None = None) -> ElectionResult:
    """Greedy selection of justified candidates.

    For entitlements ``ell = k, ..., 1``, repeatedly add any unselected
    candidate approved by at least ``ell * n / k`` voters who each approve
    fewer than ``ell`` committee members.  The output never exceeds ``k``
    seats and always satisfies EJR+; the trace records, per selection, the
    responsible voter group and the implied equal-split payments.
    """
    _require_dichotomous(instance)
    tiebreak = tiebreak or TieBreak.lex()
    profile, n, k = instance.profile, instance.n, instance.k
    approvals = profile.approval_sets
    committee: set = set()
    sat = [0] * n
    trace = []
    for ell in range(k, 0, -1):
        while True:
            eligible = {}
            for cand in range(instance.m):
                if cand in committee:
                    continue
                group = [
                    i for i in range(n) if cand in approvals[i] and sat[i] < ell
                ]
                if len(group) * k >= ell * n:
                    eligible[cand] = group
            if not eligible:
                break
            cand = tiebreak.pick(eligible)
            group = eligible[cand]
            committee.add(cand)
            for i in range(n):
                if cand in approvals[i]:
                    sat[i] += 1
            share = rat(1, len(group))
            trace.append(
                {
                    "type": "select",
                    "candidate": cand,
                    "ell": ell,
                    "group": sorted(group),
                    "payments": {i: share for i in group},
                }
            )
    return ElectionResult("gjcr", frozenset(committee), tuple(trace))


def _min_affordable_price(budgets: dict):
    """Smallest uniform price rho with sum(min(rho, b_i)) = 1, or None."""
    rich = set(budgets)
    poor_total = rat(0)
    while rich:
        rho = (1 - poor_total) / len(rich)
        new_poor = {i for i in rich if budgets[i] < rho}
        if not new_poor:
            return rho
        rich -= new_poor
        poor_total = sum((budgets[i] for i in budgets if i not in rich), rat(0))
    return None


def ear(
    instance: Instance,
    variant: str = "proportional",
    tiebreak: TieBreak | None = None,
) -> ElectionResult:
    """Expanding-approvals election on weak preferences.

    Every voter holds a budget of ``k / n``; ranks are opened one at a time,
    and while some unselected candidate's rank-``r`` supporters jointly hold
    at least 1, such a candidate is bought at price 1.

    ``variant`` controls the two open choices: ``"proportional"`` picks the
    tie-break-minimal affordable candidate and charges supporters
    proportionally to their remaining budgets; ``"mes"`` picks the candidate
    affordable at the smallest uniform price ``rho`` and charges
    ``min(rho, b_i)``.
    """
    if variant not in ("proportional", "mes"):
        raise ValueError(f"unknown variant {variant!r}")
    tiebreak = tiebreak or TieBreak.lex()
    profile, n, k = instance.profile, instance.n, instance.k
    budgets = [rat(k, n) for _ in range(n)]
    committee: set = set()
    trace = []
    for r in range(1, profile.max_rank + 1):
        while True:
            supporters = {}
            for cand in range(instance.m):
                if cand in committee:
                    continue
                sup = [
                    i
                    for i in range(n)
                    if cand in profile.ranks[i] and profile.ranks[i][cand] <= r
                ]
                if sup and sum((budgets[i] for i in sup), rat(0)) >= 1:
                    supporters[cand] = sup
            if not supporters:
                break
            if variant == "mes":
                prices = {
                    cand: _min_affordable_price({i: budgets[i] for i in sup})
                    for cand, sup in supporters.items()
                }
                cand = min(prices, key=lambda c: (prices[c],) + tiebreak.key(c))
                rho = prices[cand]
                payments = {
                    i: min(rho, budgets[i]) for i in supporters[cand]
                }
            else:
                cand = tiebreak.pick(supporters)
                total = sum((budgets[i] for i in supporters[cand]), rat(0))
                payments = {i: budgets[i] / total for i in supporters[cand]}
            committee.add(cand)
            for i, delta in payments.items():
                budgets[i] -= delta
                assert budgets[i] >= 0
            assert sum(payments.values(), rat(0)) == 1
            event = {
                "type": "select",
                "candidate": cand,
                "rank": r,
                "payments": payments,
            }
            if variant == "mes":
                event["price"] = rho
            trace.append(event)
    return ElectionResult(f"ear-{variant}", frozenset(committee), tuple(trace))


def mes_approval(instance: Instance, tiebreak: TieBreak | None = None) -> ElectionResult:
    """Method of equal shares on approval ballots (the rank-1 special case
    of :func:`ear` with the ``mes`` variant)."""
    _require_dichotomous(instance)
    result = ear(instance, "mes", tiebreak)
    return ElectionResult("mes", result.committee, result.trace)


def stv(
    instance: Instance,
    tiebreak: TieBreak | None = None,
    elimination: str = "lowest-support",
) -> ElectionResult:
    """Single transferable vote with fractional surplus transfers.

    Voters hold budgets of ``k / n``; whenever the current-first-preference
    supporters of a candidate jointly hold at least 1, such a candidate is
    elected and charged proportionally to remaining budgets (Gregory-style
    fractional transfer).  Otherwise a candidate is eliminated:
    ``"lowest-support"`` removes one whose first-preference support holds
    the least budget (ties via ``tiebreak``), ``"priority"`` removes the
    tie-break-minimal active candidate, exposing the free elimination choice
    of the STV family.
    """
    profile = instance.profile
    if not profile.is_strict:
        raise ValueError("STV requires strict ballots")
    if elimination not in ("lowest-support", "priority"):
        raise ValueError(f"unknown elimination policy {elimination!r}")
    tiebreak = tiebreak or TieBreak.lex()
    n, k = instance.n, instance.k
    budgets = [rat(k, n) for _ in range(n)]
    active = set(range(instance.m))
    committee: set = set()
    trace = []

    def first_preferences():
        supp = {cand: [] for cand in active}
        for i, ballot in enumerate(profile.ranks):
            best = None
            for cand, rank in ballot.items():
                if cand in active and (best is None or rank < ballot[best]):
                    best = cand
            if best is not None:
                supp[best].append(i)
        return supp

    while active and len(committee) < k:
        supp = first_preferences()
        totals = {
            cand: sum((budgets[i] for i in sup), rat(0)) for cand, sup in supp.items()
        }
        affordable = [cand for cand in active if totals[cand] >= 1]
        if affordable:
            cand = tiebreak.pick(affordable)
            group = supp[cand]
            total = totals[cand]
            payments = {i: budgets[i] / total for i in group}
            for i, delta in payments.items():
                budgets[i] -= delta
            assert sum(payments.values(), rat(0)) == 1
            committee.add(cand)
            active.remove(cand)
            trace.append(
                {
                    "type": "select",
                    "candidate": cand,
                    "support": total,
                    "payments": payments,
                }
            )
        else:
            if elimination == "lowest-support":
                least = min(totals.values())
                pool = [cand for cand in active if totals[cand] == least]
            else:
                pool = active
            cand = tiebreak.pick(pool)
            trace.append(
                {"type": "eliminate", "candidate": cand, "support": totals[cand]}
            )
            active.remove(cand)
    return ElectionResult("stv", frozenset(committee), tuple(trace))


# ---------------------------------------------------------------------------
# PAV


def _pav_scale(k: int) -> int:
    scale = 1
    for j in range(2, k + 1):
        g = _gcd(scale, j)
        scale = scale // g * j
    return scale


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _seq_pav(instance: Instance):
    """Greedy PAV committee (used as branch-and-bound incumbent and as the
    local-search start)."""
    n, m, k = instance.n, instance.m, instance.k
    approvals = instance.profile.approval_sets
    cand_voters = [
        [i for i in range(n) if c in approvals[i]] for c in range(m)
    ]
    scale = _pav_scale(k)
    committee: list = []
    sat = [0] * n
    score = 0
    for _ in range(k):
        gains = [
            sum(scale // (sat[i] + 1) for i in voters) for voters in cand_voters
        ]
        best = max(
            (c for c in range(m) if c not in committee),
            key=lambda c: (gains[c], -c),
        )
        committee.append(best)
        score += gains[best]
        for i in cand_voters[best]:
            sat[i] += 1
    return committee, score, scale, cand_voters


def pav_exact(
    instance: Instance, enumeration_limit: int = 2_000_000, max_m: int = 25
) -> list:
    """All committees of size ``k`` maximizing the harmonic (PAV) score.

    Branch and bound over candidates in id order with the optimistic bound
    "current score plus the top remaining marginal gains"; scores are
    integers after scaling by lcm(1..k), so optima are exact.  Guarded to
    desk scale; larger instances get :class:`ScaleGuardError` suggesting
    :func:`ls_pav`.
    """
    _require_dichotomous(instance)
    n, m, k = instance.n, instance.m, instance.k
    if m > max_m and comb(m, k) > enumeration_limit:
        raise ScaleGuardError(
            f"pav_exact guard exceeded (m={m}, k={k}); use ls_pav instead"
        )
    _, incumbent, scale, cand_voters = _seq_pav(instance)
    best_score = incumbent
    optima: list = []

    sat = [0] * n

    def dfs(start: int, chosen: list, score: int):
        nonlocal best_score, optima
        if len(chosen) == k:
            if score > best_score:
                best_score = score
                optima = [frozenset(chosen)]
            elif score == best_score:
                optima.append(frozenset(chosen))
            return
        missing = k - len(chosen)
        if m - start < missing:
            return
        gains = sorted(
            (
                sum(scale // (sat[i] + 1) for i in cand_voters[c])
                for c in range(start, m)
            ),
            reverse=True,
        )
        if score + sum(gains[:missing]) < best_score:
            return
        for cand in range(start, m - missing + 1):
            gain = sum(scale // (sat[i] + 1) for i in cand_voters[cand])
            chosen.append(cand)
            for i in cand_voters[cand]:
                sat[i] += 1
            dfs(cand + 1, chosen, score + gain)
            chosen.pop()
            for i in cand_voters[cand]:
                sat[i] -= 1

    dfs(0, [], 0)
    return sorted(optima, key=sorted)


def pav_score(instance: Instance, committee: frozenset):
    """Exact harmonic PAV score of ``committee``."""
    total = rat(0)
    for a in instance.profile.approval_sets:
        overlap = len(a & committee)
        total += sum((rat(1, j) for j in range(1, overlap + 1)), rat(0))
    return total


def ls_pav(instance: Instance, tiebreak: TieBreak | None = None) -> ElectionResult:
    """Local-search PAV: start from the greedy committee and apply single
    swaps while one improves the score by more than ``n / k^2``.

    Unlike :func:`pav_exact`, the output carries no EJR+ guarantee; its
    contract is the absence of swaps beating the threshold.
    """
    _require_dichotomous(instance)
    n, m, k = instance.n, instance.m, instance.k
    approvals = instance.profile.approval_sets
    committee0, _, scale, cand_voters = _seq_pav(instance)
    committee = set(committee0)
    threshold = rat(n, k * k)
    trace = []
    sat = [len(a & committee) for a in approvals]
    while True:
        best_gain = None
        best_pair = None
        for out in sorted(committee):
            for inc in range(m):
                if inc in committee:
                    continue
                # voters approving both candidates are unaffected by the swap
                gain = 0
                for i in cand_voters[inc]:
                    if out not in approvals[i]:
                        gain += scale // (sat[i] + 1)
                for i in cand_voters[out]:
                    if inc not in approvals[i]:
                        gain -= scale // sat[i]
                if best_gain is None or gain > best_gain:
                    best_gain, best_pair = gain, (out, inc)
        if best_pair is None or rat(best_gain, scale) <= threshold:
            break
        out, inc = best_pair
        committee.remove(out)
        committee.add(inc)
        for i in cand_voters[inc]:
            sat[i] += 1
        for i in cand_voters[out]:
            sat[i] -= 1
        trace.append({"type": "swap", "out": out, "in": inc})
    return ElectionResult("ls-pav", frozenset(committee), tuple(trace))


def seq_phragmen(instance: Instance, tiebreak: TieBreak | None = None) -> ElectionResult:
    """Sequential load-balancing election.

    Each elected candidate adds one unit of load, spread over its approvers
    so that their maximum load is as small as possible; the candidate whose
    election allows the smallest maximum load wins each seat.  The final
    load vector converts into a price system with budget above ``k``, which
    is how the output certifies its group-coverage guarantee.
    """
    _require_dichotomous(instance)
    tiebreak = tiebreak or TieBreak.lex()
    n, m, k = instance.n, instance.m, instance.k
    approvals = instance.profile.approval_sets
    cand_voters = [
        [i for i in range(n) if c in approvals[i]] for c in range(m)
    ]
    load = [rat(0)] * n
    committee: set = set()
    trace = []
    for _ in range(k):
        options = {}
        for cand in range(m):
            if cand in committee or not cand_voters[cand]:
                continue
            options[cand] = (1 + sum((load[i] for i in cand_voters[cand]), rat(0))) / len(
                cand_voters[cand]
            )
        if not options:
            break
        cand = min(options, key=lambda c: (options[c],) + tiebreak.key(c))
        new_load = options[cand]
        for i in cand_voters[cand]:
            load[i] = new_load
        committee.add(cand)
        trace.append({"type": "select", "candidate": cand, "load": new_load})
    return ElectionResult("seq-phragmen", frozenset(committee), tuple(trace))


def ejrp_monotone_pair(profile: WeakProfile, k: int, tiebreak: TieBreak | None = None):
    """A committee of size <= k that satisfies EJR+ at size ``k`` together
    with a candidate whose addition satisfies EJR+ at size ``k + 1``.

    Built from the greedy justified-candidate run at size ``k + 1``: if it
    fills all ``k + 1`` seats, dropping its last selection yields the pair;
    otherwise the committee already works at both sizes and any unselected
    candidate fills the second slot.
    """
    if k >= profile.m:
        raise ValueError("needs k < m so that a candidate can be added")
    tiebreak = tiebreak or TieBreak.lex()
    result = gjcr(Instance(profile, k + 1), tiebreak)
    bigger = result.committee
    if len(bigger) == k + 1:
        last = result.trace[-1]["candidate"]
        return bigger - {last}, last
    extra = tiebreak.pick(set(range(profile.m)) - bigger)
    return bigger, extra


RULES = {
    "gjcr": lambda inst, tb=None: gjcr(inst, tb),
    "ear": lambda inst, tb=None: ear(inst, "proportional", tb),
    "mes": lambda inst, tb=None: (
        mes_approval(inst, tb) if inst.profile.is_dichotomous else ear(inst, "mes", tb)
    ),
    "stv": lambda inst, tb=None: stv(inst, tb),
    "ls-pav": lambda inst, tb=None: ls_pav(inst, tb),
    "phragmen": lambda inst, tb=None: seq_phragmen(inst, tb),
}
