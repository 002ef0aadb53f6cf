import itertools
import random

import pytest

from prvote.core import Instance, WeakProfile, rank_expand
from prvote.axioms import (
    ScaleGuardError,
    check_ejr_brute,
    check_ejr_plus,
    check_gpsc_brute,
    check_ipsc_brute,
    check_pjr_brute,
    check_pjr_plus,
    check_psc,
    check_rank_lifted,
    check_representative,
)

import instances
import oracles


def random_approval_instance(rng, max_n=10, max_m=7):
    n = rng.randint(1, max_n)
    m = rng.randint(1, max_m)
    k = rng.randint(1, m)
    density = rng.choice([0.2, 0.4, 0.6])
    ballots = [
        [c for c in range(m) if rng.random() < density] for _ in range(n)
    ]
    return Instance(WeakProfile.from_approval(m, ballots), k)


def random_committee(rng, instance, size=None):
    size = instance.k if size is None else size
    return frozenset(rng.sample(range(instance.m), size))


def random_weak_instance(rng, max_n=6, max_m=6, complete=False):
    n = rng.randint(1, max_n)
    m = rng.randint(1, max_m)
    k = rng.randint(1, m)
    ballots = []
    for _ in range(n):
        if complete:
            cands = list(range(m))
        else:
            cands = [c for c in range(m) if rng.random() < 0.7]
        rng.shuffle(cands)
        ballot = {}
        rank = 1
        idx = 0
        while idx < len(cands):
            width = 1 + (rng.random() < 0.3 and idx + 1 < len(cands))
            for cand in cands[idx : idx + width]:
                ballot[cand] = rank
            rank += width
            idx += width
        ballots.append(ballot)
    return Instance(WeakProfile.from_ranks(m, ballots), k)


# ---------------------------------------------------------------------------
# golden worked examples


def test_fig_left_ejr_plus_witness():
    inst = instances.fig_left()
    witness = check_ejr_plus(inst, instances.FIG_LEFT_EJR_COMMITTEE)
    assert witness is not None
    assert witness.candidate == 3 and witness.ell == 3  # c4 at ell = 3
    assert witness.voters >= {1, 2, 4, 5, 6, 7}
    assert witness.replay(inst, instances.FIG_LEFT_EJR_COMMITTEE)


def test_fig_left_ejr_holds():
    inst = instances.fig_left()
    assert check_ejr_brute(inst, instances.FIG_LEFT_EJR_COMMITTEE) is None
    assert oracles.brute_ejr(inst, instances.FIG_LEFT_EJR_COMMITTEE)


def test_fig_right_ejr_plus_witness():
    inst = instances.fig_right()
    witness = check_ejr_plus(inst, instances.FIG_RIGHT_EJR_COMMITTEE)
    assert witness is not None
    assert witness.candidate == 4 and witness.ell == 2  # c5 at ell = 2
    assert witness.voters == frozenset({3, 4, 5, 6})


def test_fig_right_ejr_holds():
    inst = instances.fig_right()
    assert check_ejr_brute(inst, instances.FIG_RIGHT_EJR_COMMITTEE) is None


def test_core_stable_committee_fails_ejr_plus_but_not_pjr_plus():
    inst = instances.core_stable_not_ejrp()
    committee = instances.CORE_STABLE_COMMITTEE
    witness = check_ejr_plus(inst, committee)
    assert witness is not None
    assert witness.candidate == 0 and witness.ell == 2
    assert witness.voters == frozenset({0, 1})
    assert check_pjr_plus(inst, committee) is None
    assert oracles.brute_pjr_plus(inst, committee)


def test_full_committee_satisfies_ejr_plus():
    inst = instances.fig_left()
    assert check_ejr_plus(inst, frozenset(range(inst.m))) is None


def test_empty_committee_with_cohesive_group_fails_ejr():
    inst = instances.two_blocks(2, 2, k=2)
    witness = check_ejr_brute(inst, frozenset())
    assert witness is not None and witness.ell == 1


def test_fig_left_pjr_plus_holds():
    inst = instances.fig_left()
    assert check_pjr_plus(inst, instances.FIG_LEFT_EJR_COMMITTEE) is None


def test_unapproved_candidate_never_witnesses_pjr_plus():
    inst = Instance(WeakProfile.from_approval(3, [[0], [0]]), 2)
    # candidate 2 approved by nobody; committee misses it but cannot violate
    assert check_pjr_plus(inst, frozenset({0, 1})) is None


def test_ipsc_separation_example():
    inst = instances.ipsc_separation_example()
    committee = instances.IPSC_SEPARATION_COMMITTEE
    assert check_gpsc_brute(inst, committee) is None
    witness = check_ipsc_brute(inst, committee)
    assert witness is not None
    assert witness.candidate_set == frozenset({0, 1})  # {c1, c2}
    assert witness.voters == frozenset({0, 1})
    assert witness.replay(inst, committee)
    assert not oracles.brute_ipsc(inst, committee)
    assert oracles.brute_gpsc(inst, committee)


def test_ranked_example_psc_and_ipsc_hold_for_all_committees():
    inst = instances.ranked_robustness_example()
    for combo in itertools.combinations(range(inst.m), inst.k):
        committee = frozenset(combo)
        assert check_psc(inst, committee) is None
        assert check_ipsc_brute(inst, committee) is None


def test_ranked_example_rank_pjr_plus():
    inst = instances.ranked_robustness_example()
    witness = check_rank_lifted(inst, instances.RANKED_STV_COMMITTEE, "pjr+")
    assert witness is not None
    assert witness.rank == 2 and witness.candidate == 1  # c2 at rank 2
    assert witness.voters == frozenset({0, 1})
    assert witness.replay(inst, instances.RANKED_STV_COMMITTEE)
    # {c2,c4} repairs the violation
    assert check_rank_lifted(inst, frozenset({1, 3}), "pjr+") is None


def test_ranked_example_rank_pjr_plus_full_characterization():
    # satisfying committees: c2 with one of {c3,c4,c6}, or c3 with one of
    # {c1,c2,c5}
    inst = instances.ranked_robustness_example()
    good = set()
    for combo in itertools.combinations(range(inst.m), inst.k):
        if check_rank_lifted(inst, frozenset(combo), "pjr+") is None:
            good.add(frozenset(combo))
    expected = {frozenset({1, c}) for c in (2, 3, 5)} | {
        frozenset({2, c}) for c in (0, 1, 4)
    }
    assert good == expected


def test_vote_splitting_rank_pjr_plus():
    inst = instances.vote_splitting_example()
    witness = check_rank_lifted(
        inst, instances.VOTE_SPLITTING_STV_COMMITTEE, "pjr+"
    )
    assert witness is not None
    assert witness.candidate in (instances.C1, instances.C2, instances.C3)
    # exactly {e1,e2} plus one of {c1,c2,c3,d1} satisfies the axiom
    good = set()
    for combo in itertools.combinations(range(inst.m), inst.k):
        if check_rank_lifted(inst, frozenset(combo), "pjr+") is None:
            good.add(frozenset(combo))
    base = {instances.E1, instances.E2}
    expected = {
        frozenset(base | {extra})
        for extra in (instances.C1, instances.C2, instances.C3, instances.D1)
    }
    assert good == expected


def test_rank_ejr_plus_unsatisfiable_instance():
    inst = instances.rank_ejrp_unsatisfiable_example()
    for combo in itertools.combinations(range(inst.m), inst.k):
        witness = check_rank_lifted(inst, frozenset(combo), "ejr+")
        assert witness is not None


def test_psc_unanimous_ranking():
    ballots = [{0: 1, 1: 2, 2: 3, 3: 4}] * 4
    inst = Instance(WeakProfile.from_ranks(4, ballots), 2)
    assert check_psc(inst, frozenset({0, 1})) is None
    witness = check_psc(inst, frozenset({2, 3}))
    assert witness is not None
    assert witness.candidate_set == frozenset({0})
    assert witness.replay(inst, frozenset({2, 3}))


def test_psc_requires_strict():
    inst = instances.small_weak_example()
    with pytest.raises(ValueError):
        check_psc(inst, frozenset({0}))


def test_representative_trivial_witness():
    inst = instances.two_blocks(2, 2, k=2)
    table = {1: 0.5, 2: 1}
    witness = check_representative(inst, frozenset(), table)
    assert witness is not None and witness.value == 0


def test_scale_guards():
    with pytest.raises(ScaleGuardError):
        check_ejr_brute(
            instances.fig_left(), instances.FIG_LEFT_EJR_COMMITTEE, max_nodes=1
        )
    big = Instance(WeakProfile.from_approval(25, [[0]]), 3)
    with pytest.raises(ScaleGuardError):
        check_gpsc_brute(big, frozenset({0}))


# ---------------------------------------------------------------------------
# oracle equivalence on fuzzed instances


def test_pjr_plus_mincut_agrees_with_voter_subset_brute():
    rng = random.Random(42)
    for _ in range(150):
        inst = random_approval_instance(rng, max_n=8, max_m=6)
        committee = random_committee(rng, inst)
        got = check_pjr_plus(inst, committee) is None
        want = oracles.brute_pjr_plus(inst, committee)
        assert got == want, (inst.profile.ranks, inst.k, committee)


def test_ejr_plus_agrees_with_brute():
    rng = random.Random(43)
    for _ in range(200):
        inst = random_approval_instance(rng)
        committee = random_committee(rng, inst)
        assert (check_ejr_plus(inst, committee) is None) == oracles.brute_ejr_plus(
            inst, committee
        )


def test_ejr_and_pjr_brute_agree_with_subset_oracles():
    rng = random.Random(44)
    for _ in range(120):
        inst = random_approval_instance(rng, max_n=8, max_m=6)
        committee = random_committee(rng, inst)
        assert (check_ejr_brute(inst, committee) is None) == oracles.brute_ejr(
            inst, committee
        )
        assert (check_pjr_brute(inst, committee) is None) == oracles.brute_pjr(
            inst, committee
        )


def test_gpsc_ipsc_agree_with_subset_oracles():
    rng = random.Random(45)
    for _ in range(60):
        inst = random_weak_instance(rng, max_n=5, max_m=5)
        committee = random_committee(rng, inst)
        assert (check_gpsc_brute(inst, committee) is None) == oracles.brute_gpsc(
            inst, committee
        ), (inst.profile.ranks, inst.k, committee)
        assert (check_ipsc_brute(inst, committee) is None) == oracles.brute_ipsc(
            inst, committee
        ), (inst.profile.ranks, inst.k, committee)


def test_psc_agrees_with_subset_oracle_and_ipsc_on_strict():
    rng = random.Random(46)
    for _ in range(80):
        inst = random_weak_instance(rng, max_n=5, max_m=5, complete=True)
        if not inst.profile.is_strict:
            continue
        committee = random_committee(rng, inst)
        psc_ok = check_psc(inst, committee) is None
        assert psc_ok == oracles.brute_psc(inst, committee)
        assert psc_ok == (check_ipsc_brute(inst, committee) is None)
        assert psc_ok == (check_gpsc_brute(inst, committee) is None)


def test_strict_profiles_make_psc_ipsc_gpsc_equivalent_with_truncation():
    rng = random.Random(47)
    for _ in range(80):
        inst = random_weak_instance(rng, max_n=5, max_m=5)
        if not inst.profile.is_strict:
            continue
        committee = random_committee(rng, inst)
        psc_ok = check_psc(inst, committee) is None
        assert psc_ok == (check_ipsc_brute(inst, committee) is None)


def test_rank_lifted_on_dichotomous_equals_base():
    rng = random.Random(48)
    for _ in range(80):
        inst = random_approval_instance(rng, max_n=8, max_m=6)
        committee = random_committee(rng, inst)
        assert (check_rank_lifted(inst, committee, "pjr+") is None) == (
            check_pjr_plus(inst, committee) is None
        )
        assert (check_rank_lifted(inst, committee, "ejr+") is None) == (
            check_ejr_plus(inst, committee) is None
        )


def test_implication_lattice_on_fuzz():
    rng = random.Random(49)
    for _ in range(150):
        inst = random_approval_instance(rng, max_n=9, max_m=6)
        committee = random_committee(rng, inst)
        ejrp = check_ejr_plus(inst, committee) is None
        pjrp = check_pjr_plus(inst, committee) is None
        ejr = check_ejr_brute(inst, committee) is None
        pjr = check_pjr_brute(inst, committee) is None
        if ejrp:
            assert ejr and pjrp
        if pjrp:
            assert pjr
        if ejr:
            assert pjr


def test_rank_implication_chain_on_complete_weak_profiles():
    rng = random.Random(50)
    for _ in range(60):
        inst = random_weak_instance(rng, max_n=5, max_m=5, complete=True)
        committee = random_committee(rng, inst)
        rank_pjrp = check_rank_lifted(inst, committee, "pjr+") is None
        if rank_pjrp:
            assert check_ipsc_brute(inst, committee) is None
        if check_ipsc_brute(inst, committee) is None:
            assert check_gpsc_brute(inst, committee) is None
        rank_ejrp = check_rank_lifted(inst, committee, "ejr+") is None
        if rank_ejrp:
            assert rank_pjrp
        if rank_pjrp:
            assert check_rank_lifted(inst, committee, "pjr") is None


def test_witnesses_replay_on_fuzz():
    rng = random.Random(51)
    checks = [
        check_ejr_plus,
        check_pjr_plus,
        check_ejr_brute,
        check_pjr_brute,
    ]
    for _ in range(120):
        inst = random_approval_instance(rng)
        committee = random_committee(rng, inst)
        for check in checks:
            witness = check(inst, committee)
            if witness is not None:
                assert witness.replay(inst, committee), witness
    for _ in range(60):
        inst = random_weak_instance(rng, complete=True)
        committee = random_committee(rng, inst)
        for base in ("pjr+", "ejr+", "pjr"):
            witness = check_rank_lifted(inst, committee, base)
            if witness is not None:
                assert witness.replay(inst, committee), witness
        for check in (check_gpsc_brute, check_ipsc_brute):
            witness = check(inst, committee)
            if witness is not None:
                assert witness.replay(inst, committee), witness
        if inst.profile.is_strict:
            witness = check_psc(inst, committee)
            if witness is not None:
                assert witness.replay(inst, committee), witness
