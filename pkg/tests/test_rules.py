import random
from fractions import Fraction

import pytest

from prvote.core import Instance, WeakProfile
from prvote.axioms import (
    ScaleGuardError,
    check_ejr_plus,
    check_pjr_plus,
    check_psc,
)
from prvote.exactmath import rat
from prvote.rules import (
    ElectionResult,
    TieBreak,
    ear,
    ejrp_monotone_pair,
    gjcr,
    ls_pav,
    mes_approval,
    pav_exact,
    pav_score,
    seq_phragmen,
    stv,
)

import instances
import oracles
from test_axioms import random_approval_instance


def spent_per_candidate(result: ElectionResult):
    spend = {}
    for event in result.trace:
        if event["type"] == "select":
            spend[event["candidate"]] = sum(
                event["payments"].values(), rat(0)
            )
    return spend


def spent_per_voter(result: ElectionResult):
    spend = {}
    for event in result.trace:
        if event["type"] == "select":
            for voter, delta in event["payments"].items():
                spend[voter] = spend.get(voter, rat(0)) + delta
    return spend


# ---------------------------------------------------------------------------
# GJCR


def test_gjcr_fig_left():
    result = gjcr(instances.fig_left())
    assert result.committee == frozenset({2, 3})  # {c3, c4}
    assert [e["ell"] for e in result.trace] == [3, 3]


def test_gjcr_fig_right_lexicographic():
    result = gjcr(instances.fig_right())
    assert result.committee == frozenset({0, 2, 3, 5})  # {c1,c3,c4,c6}
    assert [(e["candidate"], e["ell"]) for e in result.trace] == [
        (2, 2),
        (3, 2),
        (0, 1),
        (5, 1),
    ]


def test_gjcr_partial_committee():
    inst = Instance(WeakProfile.from_approval(2, [[0]]), 2)
    result = gjcr(inst)
    assert result.committee == frozenset({0})


def test_gjcr_outputs_satisfy_ejr_plus_on_fuzz():
    rng = random.Random(60)
    for _ in range(150):
        inst = random_approval_instance(rng, max_n=12, max_m=8)
        result = gjcr(inst)
        assert len(result.committee) <= inst.k
        assert check_ejr_plus(inst, result.committee) is None
        # the implied equal-split payments never overdraw a voter's budget
        per_cand = spent_per_candidate(result)
        assert all(total == 1 for total in per_cand.values())
        per_voter = spent_per_voter(result)
        assert all(
            0 <= total <= rat(inst.k, inst.n) for total in per_voter.values()
        )


# ---------------------------------------------------------------------------
# EAR / MES


def test_ear_single_voter_top_choice():
    inst = Instance(WeakProfile.from_ranks(2, [{0: 1, 1: 2}]), 1)
    assert ear(inst).committee == frozenset({0})
    assert ear(inst, "mes").committee == frozenset({0})


def test_ear_vote_splitting_mes_variants():
    inst = instances.vote_splitting_example()
    result = ear(inst, "mes")
    assert result.committee == frozenset(
        {instances.E1, instances.E2, instances.C1}
    )
    # a tie-break preferring c3 yields the other documented output
    priority = [instances.C3] + [c for c in range(8) if c != instances.C3]
    other = ear(inst, "mes", TieBreak(priority, m=8))
    assert other.committee == frozenset(
        {instances.E1, instances.E2, instances.C3}
    )


def test_ear_ranked_example_includes_c2_or_c3():
    inst = instances.ranked_robustness_example()
    committee = ear(inst).committee
    assert committee & {1, 2}
    committee = ear(inst, "mes").committee
    assert committee & {1, 2}


def test_ear_budget_conservation():
    rng = random.Random(61)
    from test_axioms import random_weak_instance

    for _ in range(80):
        inst = random_weak_instance(rng, max_n=9, max_m=6)
        for variant in ("proportional", "mes"):
            result = ear(inst, variant)
            per_cand = spent_per_candidate(result)
            assert all(total == 1 for total in per_cand.values())
            per_voter = spent_per_voter(result)
            assert all(
                0 <= total <= rat(inst.k, inst.n) for total in per_voter.values()
            )
            assert len(result.committee) <= inst.k


def test_mes_approval_equals_ear_mes_on_dichotomous():
    rng = random.Random(62)
    for _ in range(100):
        inst = random_approval_instance(rng, max_n=10, max_m=7)
        assert mes_approval(inst).committee == ear(inst, "mes").committee


def test_mes_approval_uniform_split():
    inst = Instance(WeakProfile.from_approval(1, [[0]] * 5), 1)
    result = mes_approval(inst)
    assert result.committee == frozenset({0})
    assert result.trace[0]["price"] == rat(1, 5)
    assert all(p == rat(1, 5) for p in result.trace[0]["payments"].values())


def test_mes_disjoint_halves():
    inst = instances.two_blocks(3, 3, k=2)
    result = mes_approval(inst)
    assert result.committee == frozenset({0, 1})
    assert all(e["price"] == rat(2, 6) for e in result.trace)


def test_mes_fig_left_passes_ejr_plus():
    inst = instances.fig_left()
    assert check_ejr_plus(inst, mes_approval(inst).committee) is None


def test_mes_requires_dichotomous():
    with pytest.raises(ValueError):
        mes_approval(instances.ranked_robustness_example())


# ---------------------------------------------------------------------------
# STV


def test_stv_ranked_example_reaches_c4_c6():
    inst = instances.ranked_robustness_example()
    # eliminate c2, c3, c5 first, then c1
    priority = [1, 2, 4, 0, 3, 5]
    result = stv(inst, TieBreak(priority, m=6))
    assert result.committee == instances.RANKED_STV_COMMITTEE
    kinds = [(e["type"], e["candidate"]) for e in result.trace]
    assert kinds == [
        ("eliminate", 1),
        ("eliminate", 2),
        ("eliminate", 4),
        ("select", 3),
        ("eliminate", 0),
        ("select", 5),
    ]


def test_stv_vote_splitting_priority_elimination():
    inst = instances.vote_splitting_example()
    # c3 must fall before c1 and c2: eliminating those two first would leave
    # all three split voters on c3, making it affordable and hence elected
    priority = [
        instances.E1,
        instances.E2,
        instances.C3,
        instances.C1,
        instances.C2,
        instances.D1,
        instances.E3,
        instances.E4,
    ]
    result = stv(inst, TieBreak(priority, m=8), elimination="priority")
    assert result.committee == instances.VOTE_SPLITTING_STV_COMMITTEE
    eliminated = [
        e["candidate"] for e in result.trace if e["type"] == "eliminate"
    ]
    assert eliminated == [instances.C3, instances.C1, instances.C2, instances.D1]


def test_stv_unanimous_ranking():
    ballots = [{0: 1, 1: 2, 2: 3}] * 3
    inst = Instance(WeakProfile.from_ranks(3, ballots), 1)
    assert stv(inst).committee == frozenset({0})


def test_stv_requires_strict():
    with pytest.raises(ValueError):
        stv(instances.small_weak_example())


def _random_full_ranking_instance(rng, max_n=10, max_m=6):
    n = rng.randint(1, max_n)
    m = rng.randint(1, max_m)
    k = rng.randint(1, m)
    ballots = []
    for _ in range(n):
        order = list(range(m))
        rng.shuffle(order)
        ballots.append({c: pos + 1 for pos, c in enumerate(order)})
    return Instance(WeakProfile.from_ranks(m, ballots), k)


def test_stv_fills_committee_and_satisfies_psc_on_fuzz():
    rng = random.Random(63)
    for _ in range(120):
        inst = _random_full_ranking_instance(rng)
        for elimination in ("lowest-support", "priority"):
            result = stv(inst, elimination=elimination)
            assert len(result.committee) == inst.k
            assert check_psc(inst, result.committee) is None
            per_voter = spent_per_voter(result)
            assert all(
                0 <= total <= rat(inst.k, inst.n) for total in per_voter.values()
            )


# ---------------------------------------------------------------------------
# PAV


def test_pav_exact_two_blocks():
    inst = instances.two_blocks(2, 2, k=2)
    optima = pav_exact(inst)
    assert optima == [frozenset({0, 1})]
    assert pav_score(inst, optima[0]) == 4


def test_pav_exact_remark_instance():
    inst = instances.core_stable_not_ejrp()
    optima = pav_exact(inst)
    assert set(optima) == {frozenset({0, 1}), frozenset({0, 2})}
    assert pav_score(inst, optima[0]) == Fraction(5, 2)


def test_pav_exact_fig_left_satisfies_ejr_plus():
    inst = instances.fig_left()
    for committee in pav_exact(inst):
        assert check_ejr_plus(inst, committee) is None


def test_pav_exact_matches_enumeration_oracle():
    rng = random.Random(64)
    for _ in range(60):
        inst = random_approval_instance(rng, max_n=8, max_m=7)
        optima = pav_exact(inst)
        want, want_score = oracles.brute_pav_optima(inst)
        assert set(optima) == set(want)
        assert pav_score(inst, optima[0]) == want_score


def test_pav_exact_scale_guard():
    inst = Instance(
        WeakProfile.from_approval(40, [[0, 1], [2, 3]]), 15
    )
    with pytest.raises(ScaleGuardError):
        pav_exact(inst)


def test_ls_pav_fixed_points_and_contract():
    # unanimous approvals of exactly k candidates
    inst = Instance(WeakProfile.from_approval(5, [[0, 1, 2]] * 4), 3)
    assert ls_pav(inst).committee == frozenset({0, 1, 2})
    # empty ballots: all committees tie at score 0
    empty = Instance(WeakProfile.from_approval(4, [[], []]), 2)
    result = ls_pav(empty)
    assert len(result.committee) == 2
    assert pav_score(empty, result.committee) == 0


def test_ls_pav_no_improving_swap_beyond_threshold():
    rng = random.Random(65)
    for _ in range(60):
        inst = random_approval_instance(rng, max_n=10, max_m=7)
        result = ls_pav(inst)
        committee = result.committee
        assert len(committee) == inst.k
        base = pav_score(inst, committee)
        threshold = rat(inst.n, inst.k * inst.k)
        for out in committee:
            for inc in range(inst.m):
                if inc in committee:
                    continue
                swapped = committee - {out} | {inc}
                assert pav_score(inst, swapped) - base <= threshold
        # within the local-search guarantee of the optimum
        optimum = pav_score(inst, pav_exact(inst)[0])
        assert base <= optimum
        assert optimum - base <= rat(inst.n, inst.k)


# ---------------------------------------------------------------------------
# sequential Phragmen


def test_phragmen_two_blocks():
    inst = instances.two_blocks(2, 2, k=2)
    assert seq_phragmen(inst).committee == frozenset({0, 1})


def test_phragmen_single_approver_per_candidate():
    inst = Instance(WeakProfile.from_approval(2, [[0], [1]]), 2)
    assert seq_phragmen(inst).committee == frozenset({0, 1})


def test_phragmen_fig_right_passes_pjr_plus():
    inst = instances.fig_right()
    committee = seq_phragmen(inst).committee
    assert check_pjr_plus(inst, committee) is None


def test_phragmen_outputs_satisfy_pjr_plus_on_fuzz():
    rng = random.Random(66)
    for _ in range(120):
        inst = random_approval_instance(rng, max_n=12, max_m=8)
        committee = seq_phragmen(inst).committee
        assert check_pjr_plus(inst, committee) is None


# ---------------------------------------------------------------------------
# committee monotonicity


def test_monotone_pair_unanimous_single_candidate():
    profile = WeakProfile.from_approval(2, [[0], [0]])
    committee, extra = ejrp_monotone_pair(profile, 1)
    assert committee == frozenset({0}) and extra == 1


def test_monotone_pair_k_is_m_minus_one():
    inst = instances.fig_left()
    committee, extra = ejrp_monotone_pair(inst.profile, inst.m - 1)
    assert extra not in committee
    assert check_ejr_plus(
        Instance(inst.profile, inst.m - 1), committee
    ) is None
    assert check_ejr_plus(
        Instance(inst.profile, inst.m), committee | {extra}
    ) is None


def test_monotone_pair_on_fuzz():
    rng = random.Random(67)
    for _ in range(120):
        inst = random_approval_instance(rng, max_n=10, max_m=7)
        if inst.k >= inst.m:
            continue
        committee, extra = ejrp_monotone_pair(inst.profile, inst.k)
        assert len(committee) <= inst.k and extra not in committee
        assert check_ejr_plus(Instance(inst.profile, inst.k), committee) is None
        assert (
            check_ejr_plus(
                Instance(inst.profile, inst.k + 1), committee | {extra}
            )
            is None
        )
