"""Price-system certification for committees.

A committee is priceable when a budget ``B`` can be split evenly across
voters such that elected candidates are fully paid (price 1) by their
approvers and no unelected candidate's supporters retain a full unit of
leftover money.  On ranked ballots the leftover test tightens rank by rank:
money a supporter spent on candidates ranked worse than ``r`` counts as
available when judging a candidate at rank ``r``.

Certification solves an exact rational LP maximizing ``B`` (capped at
``k + 1`` so the strict ``B > k`` question stays decidable) and re-validates
every constraint on the returned system without trusting the solver.
"""

from __future__ import annotations

from dataclasses import dataclass

from prvote.core import Instance, rank_expand
from prvote.exactmath import LinearProgram, format_rational, lp_maximize, rat

__all__ = [
    "PriceSystem",
    "check_priceable",
    "check_rank_priceable",
    "price_system_from_payments",
]


@dataclass(frozen=True)
class PriceSystem:
    """A budget plus sparse voter-to-candidate payments, all exact."""

    budget: object
    payments: dict  # (voter, candidate) -> rational

    def voter_spend(self, voter: int):
        return sum(
            (p for (i, _c), p in self.payments.items() if i == voter), rat(0)
        )

    def candidate_income(self, cand: int):
        return sum(
            (p for (_i, c), p in self.payments.items() if c == cand), rat(0)
        )

    def to_dict(self, names=None) -> dict:
        from prvote.core import candidate_name

        return {
            "budget": format_rational(self.budget),
            "payments": [
                {
                    "voter": voter,
                    "candidate": candidate_name(cand, names),
                    "amount": format_rational(amount),
                }
                for (voter, cand), amount in sorted(self.payments.items())
                if amount != 0
            ],
        }

    def violations(
        self, instance: Instance, committee: frozenset, rank_mode: bool = False
    ) -> list:
        """Replay the defining constraints; returns human-readable breaches."""
        profile, n = instance.profile, instance.n
        approvals = profile.approval_sets
        share = self.budget / n
        problems = []
        if not self.budget > 0:
            problems.append("budget must be positive")
        for (voter, cand), amount in self.payments.items():
            if amount < 0:
                problems.append(f"negative payment by voter {voter}")
            if cand not in approvals[voter]:
                problems.append(f"voter {voter} pays unapproved candidate {cand}")
            if cand not in committee and amount != 0:
                problems.append(f"payment to unelected candidate {cand}")
        for voter in range(n):
            if self.voter_spend(voter) > share:
                problems.append(f"voter {voter} spends beyond the budget share")
        for cand in committee:
            if self.candidate_income(cand) != 1:
                problems.append(f"candidate {cand} not fully paid")
        spend = [self.voter_spend(i) for i in range(n)]
        if rank_mode:
            for r in range(1, profile.max_rank + 1):
                expanded = rank_expand(profile, r).approval_sets
                for cand in range(instance.m):
                    if cand in committee:
                        continue
                    supporters = [i for i in range(n) if cand in expanded[i]]
                    slack = sum((share - spend[i] for i in supporters), rat(0))
                    spent_below = sum(
                        (
                            amount
                            for (voter, paid), amount in self.payments.items()
                            if voter in supporters and paid not in expanded[voter]
                        ),
                        rat(0),
                    )
                    if slack + spent_below > 1:
                        problems.append(
                            f"rank-{r} leftover for candidate {cand} exceeds 1"
                        )
        else:
            for cand in range(instance.m):
                if cand in committee:
                    continue
                supporters = [i for i in range(n) if cand in approvals[i]]
                slack = sum((share - spend[i] for i in supporters), rat(0))
                if slack > 1:
                    problems.append(f"leftover for candidate {cand} exceeds 1")
        return problems


def _solve_price_lp(instance: Instance, committee: frozenset, rank_mode: bool):
    profile, n, k = instance.profile, instance.n, instance.k
    approvals = profile.approval_sets
    pairs = [
        (i, c)
        for i in range(n)
        for c in sorted(approvals[i] & committee)
    ]
    var = {pair: idx + 1 for idx, pair in enumerate(pairs)}  # var 0 is B
    lp = LinearProgram(1 + len(pairs), [1] + [0] * len(pairs))
    # cap keeps the LP bounded without ever cutting feasibility: any feasible
    # system has some voter spend at most k, so budgets up to n*k suffice,
    # and the strict budget > k comparison is unaffected
    lp.add({0: 1}, "<=", n * k + 1)
    for i in range(n):
        coeffs = {var[(i, c)]: n for c in approvals[i] & committee}
        coeffs[0] = -1
        lp.add(coeffs, "<=", 0)
    for c in sorted(committee):
        coeffs = {var[(i, c)]: 1 for i in range(n) if c in approvals[i]}
        lp.add(coeffs, "=", 1)
    if rank_mode:
        rank_sets = {
            r: rank_expand(profile, r).approval_sets
            for r in range(1, profile.max_rank + 1)
        }
        seen_rows = set()
        for c in range(instance.m):
            if c in committee:
                continue
            for r, expanded in rank_sets.items():
                supporters = [i for i in range(n) if c in expanded[i]]
                if not supporters:
                    continue
                coeffs: dict = {0: len(supporters)}
                for i in supporters:
                    for paid in approvals[i] & committee:
                        if paid in expanded[i]:
                            coeffs[var[(i, paid)]] = coeffs.get(var[(i, paid)], 0) - n
                # consecutive ranks often repeat the same inequality
                key = tuple(sorted(coeffs.items()))
                if key in seen_rows:
                    continue
                seen_rows.add(key)
                lp.add(coeffs, "<=", n)
    else:
        for c in range(instance.m):
            if c in committee:
                continue
            supporters = [i for i in range(n) if c in approvals[i]]
            if not supporters:
                continue
            coeffs = {0: len(supporters)}
            for i in supporters:
                for paid in approvals[i] & committee:
                    coeffs[var[(i, paid)]] = coeffs.get(var[(i, paid)], 0) - n
            lp.add(coeffs, "<=", n)
    result = lp_maximize(lp)
    if result.status != "optimal":
        return None
    budget = result.assignment[0]
    payments = {
        pair: result.assignment[idx] for pair, idx in var.items()
    }
    return PriceSystem(budget, payments)


def check_priceable(
    instance: Instance,
    committee: frozenset,
    require_budget_above_k: bool = False,
) -> PriceSystem | None:
    """Certify priceability of a committee on approval ballots.

    Returns a maximal-budget :class:`PriceSystem` (budget capped at
    ``n * k + 1`` for boundedness) or ``None``.  With
    ``require_budget_above_k`` the verdict is positive only when some system
    has budget strictly above ``k``, decided by exact comparison of the LP
    optimum.
    """
    if not instance.profile.is_dichotomous:
        raise ValueError("priceability is defined for approval profiles")
    system = _solve_price_lp(instance, committee, rank_mode=False)
    return _finalize(system, instance, committee, require_budget_above_k, False)


def check_rank_priceable(
    instance: Instance,
    committee: frozenset,
    require_budget_above_k: bool = False,
) -> PriceSystem | None:
    """Certify rank-priceability of a committee on weak-preference ballots.

    Like :func:`check_priceable` but with the per-rank leftover constraints;
    their feasibility implies the plain leftover constraint, which the
    returned system replays as a sanity check.
    """
    system = _solve_price_lp(instance, committee, rank_mode=True)
    return _finalize(system, instance, committee, require_budget_above_k, True)


def _finalize(system, instance, committee, require_above_k, rank_mode):
    if system is None:
        return None
    if require_above_k and not system.budget > instance.k:
        return None
    problems = system.violations(instance, committee, rank_mode)
    if problems:
        raise RuntimeError(
            "LP produced an invalid price system: " + "; ".join(problems)
        )
    return system


def price_system_from_payments(
    instance: Instance, committee: frozenset, payments: dict
) -> PriceSystem | None:
    """Best rank-mode price system over fixed payments, without an LP.

    With payments pinned (e.g. taken from a budget rule's spend log), every
    constraint is linear in the budget alone: the per-voter spending bound
    gives a lower limit and each per-rank leftover constraint an upper
    limit.  Returns the maximal-budget system, or ``None`` when the limits
    cross or a payment is structurally invalid.  The result replays the
    full constraint set, so a returned system is a complete certificate of
    rank-priceability; ``None`` says nothing about other payment choices.
    """
    profile, n = instance.profile, instance.n
    approvals = profile.approval_sets
    payments = {pair: rat(p) for pair, p in payments.items() if p != 0}
    for (voter, cand), amount in payments.items():
        if amount < 0 or cand not in approvals[voter] or cand not in committee:
            return None
    income: dict = {c: rat(0) for c in committee}
    spend = [rat(0)] * n
    for (voter, cand), amount in payments.items():
        income[cand] += amount
        spend[voter] += amount
    if any(total != 1 for total in income.values()):
        return None
    budget_min = max(spend, default=rat(0)) * n
    budget_max = None
    for r in range(1, profile.max_rank + 1):
        expanded = rank_expand(profile, r).approval_sets
        for cand in range(instance.m):
            if cand in committee:
                continue
            supporters = [i for i in range(n) if cand in expanded[i]]
            if not supporters:
                continue
            spent = sum((spend[i] for i in supporters), rat(0))
            outside = sum(
                (
                    amount
                    for (voter, paid), amount in payments.items()
                    if voter in supporters and paid not in expanded[voter]
                ),
                rat(0),
            )
            cap = rat(n) * (1 + spent - outside) / len(supporters)
            if budget_max is None or cap < budget_max:
                budget_max = cap
    if budget_max is None:
        budget_max = rat(n * instance.k + 1)
    if budget_max < budget_min or budget_max <= 0:
        return None
    system = PriceSystem(budget_max, payments)
    if system.violations(instance, committee, rank_mode=True):
        return None
    return system
