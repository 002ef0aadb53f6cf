"""Participatory budgeting with cost utilities.

Projects carry positive costs and the electorate shares a global budget
limit; a voter's utility for an outcome is the total cost of her approved
funded projects.  The module provides the equal-shares rule generalized to
costs and exact verifiers for the two "up to any project" fairness notions,
which bound how far a voter group's funded cost may fall below its
proportional share before some commonly approved unfunded project certifies
a violation.
"""

from __future__ import annotations

from dataclasses import dataclass

from prvote.axioms import Witness
from prvote.core import Instance, WeakProfile
from prvote.exactmath import (
    format_rational,
    min_coverage_minus_modular,
    parse_rational,
    rat,
)
from prvote.rules import ElectionResult, TieBreak, _min_affordable_price

__all__ = [
    "PBInstance",
    "mes_pb",
    "check_pb_ejr_plus_upto",
    "check_pb_pjr_plus_upto",
    "witness_replays",
    "pb_from_dict",
    "pb_to_dict",
]


@dataclass(frozen=True)
class PBInstance:
    """Approval profile over projects with costs and a budget limit."""

    profile: WeakProfile
    costs: tuple
    budget: object

    def __post_init__(self):
        if not self.profile.is_dichotomous:
            raise ValueError("budgeting instances use approval ballots")
        if len(self.costs) != self.profile.m:
            raise ValueError("need one cost per project")
        if any(not cost > 0 for cost in self.costs):
            raise ValueError("project costs must be positive")
        if not self.budget > 0:
            raise ValueError("budget limit must be positive")

    @property
    def n(self) -> int:
        return self.profile.n

    @property
    def m(self) -> int:
        return self.profile.m

    def outcome_cost(self, outcome) -> object:
        return sum((self.costs[p] for p in outcome), rat(0))

    def is_feasible(self, outcome) -> bool:
        return self.outcome_cost(outcome) <= self.budget


def pb_from_dict(data) -> PBInstance:
    profile = WeakProfile.from_approval(int(data["m"]), data["voters_approval"])
    costs = tuple(parse_rational(c) for c in data["costs"])
    return PBInstance(profile, costs, parse_rational(data["budget"]))


def pb_to_dict(pb: PBInstance) -> dict:
    return {
        "m": pb.m,
        "voters_approval": [sorted(b) for b in pb.profile.ranks],
        "costs": [format_rational(c) for c in pb.costs],
        "budget": format_rational(pb.budget),
    }


def mes_pb(pb: PBInstance, tiebreak: TieBreak | None = None) -> ElectionResult:
    """Equal shares over costed projects.

    Every voter holds ``budget / n``; a project is bought once its approvers
    can cover its cost with per-unit contributions capped at some uniform
    rate, always picking the cheapest such rate.  Spending stops when no
    project is affordable; leftover money stays unspent (no completion).
    """
    tiebreak = tiebreak or TieBreak.lex()
    n = pb.n
    budgets = [rat(pb.budget, n) for _ in range(n)]
    approvals = pb.profile.approval_sets
    outcome: set = set()
    trace = []
    while True:
        rates = {}
        for p in range(pb.m):
            if p in outcome:
                continue
            supporters = [i for i in range(n) if p in approvals[i]]
            if not supporters:
                continue
            if sum((budgets[i] for i in supporters), rat(0)) < pb.costs[p]:
                continue
            # min rho with sum(min(b_i, rho * cost)) = cost is the rho of the
            # unit-price problem on budgets scaled by the cost
            scaled = {i: budgets[i] / pb.costs[p] for i in supporters}
            rates[p] = _min_affordable_price(scaled)
        if not rates:
            break
        project = min(rates, key=lambda p: (rates[p],) + tiebreak.key(p))
        rho = rates[project]
        payments = {
            i: min(budgets[i], rho * pb.costs[project])
            for i in range(n)
            if project in approvals[i]
        }
        assert sum(payments.values(), rat(0)) == pb.costs[project]
        for i, delta in payments.items():
            budgets[i] -= delta
            assert budgets[i] >= 0
        outcome.add(project)
        trace.append(
            {
                "type": "select",
                "candidate": project,
                "price": rho,
                "payments": payments,
            }
        )
    result = ElectionResult("mes-pb", frozenset(outcome), tuple(trace))
    assert pb.is_feasible(result.committee)
    return result


def check_pb_ejr_plus_upto(pb: PBInstance, outcome: frozenset) -> Witness | None:
    """Cost-utility EJR+ up to any project.

    Violated iff some unfunded project ``p`` has a group of approvers whose
    funded approved cost plus ``c(p)`` stays within every member's share of
    the group entitlement ``|group| * budget / n``.  Checked exactly by
    scanning sorted prefixes of approvers.
    """
    approvals = pb.profile.approval_sets
    n = pb.n
    cost_sat = [
        sum((pb.costs[p] for p in approvals[i] & outcome), rat(0))
        for i in range(n)
    ]
    share = rat(pb.budget, n)
    for p in range(pb.m):
        if p in outcome:
            continue
        approvers = sorted(
            (i for i in range(n) if p in approvals[i]),
            key=lambda i: (cost_sat[i], i),
        )
        for size in range(1, len(approvers) + 1):
            worst = cost_sat[approvers[size - 1]]
            if worst + pb.costs[p] <= size * share:
                group = frozenset(approvers[:size])
                return Witness("pb-ejr+", group, candidate=p, value=worst)
    return None


def check_pb_pjr_plus_upto(pb: PBInstance, outcome: frozenset) -> Witness | None:
    """Cost-utility PJR+ up to any project.

    Violated iff some unfunded project ``p`` has an approver group whose
    jointly funded approved cost plus ``c(p)`` stays within the group
    entitlement; the group minimizing funded-cost-minus-entitlement comes
    from the exact coverage min-cut.
    """
    approvals = pb.profile.approval_sets
    n = pb.n
    alpha = rat(pb.budget, n)
    weights = {p: pb.costs[p] for p in outcome}
    for p in range(pb.m):
        if p in outcome:
            continue
        ground = [i for i in range(n) if p in approvals[i]]
        if not ground:
            continue
        items = {i: approvals[i] & outcome for i in ground}
        value, argmin = min_coverage_minus_modular(items, weights, alpha)
        if value <= -pb.costs[p]:
            return Witness(
                "pb-pjr+", frozenset(argmin), candidate=p, value=value
            )
    return None


def witness_replays(pb: PBInstance, outcome: frozenset, witness: Witness) -> bool:
    """Re-derive a budgeting violation from the definitions."""
    approvals = pb.profile.approval_sets
    group = witness.voters
    p = witness.candidate
    if not group or p in outcome:
        return False
    if not all(p in approvals[i] for i in group):
        return False
    entitlement = len(group) * rat(pb.budget, pb.n)
    if witness.kind == "pb-ejr+":
        return all(
            sum((pb.costs[q] for q in approvals[i] & outcome), rat(0))
            + pb.costs[p]
            <= entitlement
            for i in group
        )
    if witness.kind == "pb-pjr+":
        union = set().union(*(approvals[i] & outcome for i in group))
        return (
            sum((pb.costs[q] for q in union), rat(0)) + pb.costs[p] <= entitlement
        )
    raise ValueError(f"not a budgeting witness: {witness.kind!r}")
