"""Cross-checks of the compiled kernels against the reference checkers."""

import random

import pytest

from prvote import kernels
from prvote.axioms import (
    check_ejr_brute,
    check_ejr_plus,
    check_pjr_brute,
    check_pjr_plus,
    check_psc,
    check_rank_lifted,
)
from prvote.core import Instance, ScaleGuardError, WeakProfile

import instances
from test_axioms import random_approval_instance, random_committee, random_weak_instance
from test_rules import _random_full_ranking_instance


def test_kernels_match_reference_on_approval_fuzz():
    rng = random.Random(80)
    for _ in range(200):
        inst = random_approval_instance(rng, max_n=12, max_m=9)
        fast = kernels.FastInstance(inst)
        committee = random_committee(rng, inst)
        assert fast.ejr_plus(committee) == (check_ejr_plus(inst, committee) is None)
        assert fast.pjr_plus(committee) == (check_pjr_plus(inst, committee) is None)
        assert fast.ejr(committee) == (check_ejr_brute(inst, committee) is None)
        assert fast.pjr(committee) == (check_pjr_brute(inst, committee) is None)


def test_kernels_match_reference_on_ranked_fuzz():
    rng = random.Random(81)
    for _ in range(120):
        inst = _random_full_ranking_instance(rng, max_n=10, max_m=7)
        fast = kernels.FastInstance(inst)
        committee = random_committee(rng, inst)
        assert fast.psc(committee) == (check_psc(inst, committee) is None)
        assert fast.rank_pjr_plus(committee) == (
            check_rank_lifted(inst, committee, "pjr+") is None
        )
        assert fast.rank_ejr_plus(committee) == (
            check_rank_lifted(inst, committee, "ejr+") is None
        )


def test_kernels_match_reference_on_truncated_weak_fuzz():
    rng = random.Random(82)
    for _ in range(120):
        inst = random_weak_instance(rng, max_n=8, max_m=6)
        fast = kernels.FastInstance(inst)
        committee = random_committee(rng, inst)
        assert fast.rank_pjr_plus(committee) == (
            check_rank_lifted(inst, committee, "pjr+") is None
        )
        assert fast.rank_ejr_plus(committee) == (
            check_rank_lifted(inst, committee, "ejr+") is None
        )


def test_kernels_golden_instances():
    inst = instances.fig_left()
    fast = kernels.FastInstance(inst)
    assert not fast.ejr_plus(instances.FIG_LEFT_EJR_COMMITTEE)
    assert fast.ejr(instances.FIG_LEFT_EJR_COMMITTEE)
    assert fast.pjr_plus(instances.FIG_LEFT_EJR_COMMITTEE)
    ranked = kernels.FastInstance(instances.ranked_robustness_example())
    assert ranked.psc(instances.RANKED_STV_COMMITTEE)
    assert not ranked.rank_pjr_plus(instances.RANKED_STV_COMMITTEE)
    assert ranked.rank_pjr_plus(frozenset({1, 3}))


def test_kernel_budget_guard():
    inst = instances.fig_left()
    fast = kernels.FastInstance(inst)
    with pytest.raises(ScaleGuardError):
        fast.ejr(instances.FIG_LEFT_EJR_COMMITTEE, node_budget=1)


def test_kernel_scale_bounds():
    wide = Instance(WeakProfile.from_approval(70, [[0]]), 2)
    with pytest.raises(ScaleGuardError):
        kernels.FastInstance(wide)


def test_large_voter_counts_cross_word_boundary():
    rng = random.Random(83)
    ballots = [
        [c for c in range(8) if rng.random() < 0.4] for _ in range(150)
    ]
    inst = Instance(WeakProfile.from_approval(8, ballots), 3)
    fast = kernels.FastInstance(inst)
    committee = frozenset({0, 1, 2})
    assert fast.ejr_plus(committee) == (check_ejr_plus(inst, committee) is None)
    assert fast.ejr(committee) == (check_ejr_brute(inst, committee, max_nodes=10**7) is None)
    assert fast.pjr(committee) == (check_pjr_brute(inst, committee, max_nodes=10**7) is None)
