import random

import pytest

from copeland.core import (
    Alpha,
    Election,
    LinearOrder,
    MakeWinner,
    NONUNIQUE,
    NotIrrational,
    PreferenceTable,
    ScoreOrder,
    UNIQUE,
)
from copeland.reductions import (
    AddedCandidates,
    ControlInstance,
    DeletedVoters,
    Graph,
    reduce_vc_to_ccacu,
    vc_brute,
)
from copeland.solvers_exact import (
    BudgetExceeded,
    SizeLimits,
    apply_witness,
    solve_bribery_exact,
    solve_control_exact,
    solve_microbribery_exact,
)
from conftest import random_election

HALF = Alpha(1, 2)
LIMITS = SizeLimits(max_subsets=1 << 22)


class TestVoterControl:
    def test_ccdv_spec_example(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b"), 2), LinearOrder(("b", "a"), 1)))
        inst = ControlInstance("CCDV", NONUNIQUE, HALF, e, "b", k=1)
        witness = solve_control_exact(inst, LIMITS)
        assert isinstance(witness, DeletedVoters)
        assert witness.ballots == (LinearOrder(("a", "b"), 1),)

    def test_trivial_yes_with_zero_budget(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b"), 2), LinearOrder(("b", "a"), 1)))
        inst = ControlInstance("CCDV", NONUNIQUE, HALF, e, "a", k=0)
        witness = solve_control_exact(inst, LIMITS)
        assert witness == DeletedVoters(())

    def test_ccav_with_pool(self):
        e = Election(("p", "q"), (LinearOrder(("q", "p")),))
        pool = (LinearOrder(("p", "q")), LinearOrder(("p", "q")))
        inst = ControlInstance("CCAV", NONUNIQUE, HALF, e, "p", pool=pool, k=2)
        assert solve_control_exact(inst, LIMITS) is not None
        inst0 = ControlInstance("CCAV", NONUNIQUE, HALF, e, "p", pool=pool, k=0)
        assert solve_control_exact(inst0, LIMITS) is None

    def test_pv_te(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b")), LinearOrder(("b", "a"))))
        inst = ControlInstance("DCPV-TE", NONUNIQUE, HALF, e, "a")
        witness = solve_control_exact(inst, LIMITS)
        assert witness is not None


class TestCandidateControl:
    def test_ccacu_k3_is_no(self):
        g = Graph.of(3, [(1, 2), (1, 3), (2, 3)])
        inst = reduce_vc_to_ccacu(g, 1, HALF, NONUNIQUE)
        assert solve_control_exact(inst, LIMITS) is None
        assert not vc_brute(g, 1)

    def test_acu_equals_ac_with_full_budget(self, rng):
        for _ in range(20):
            e = random_election(rng, max_candidates=5, max_units=5)
            if len(e.candidates) < 3:
                continue
            p = e.candidates[0]
            spoilers = e.candidates[-1:]
            base = dict(model=NONUNIQUE, alpha=HALF, election=e,
                        distinguished=p, spoilers=spoilers)
            acu = solve_control_exact(ControlInstance(problem="CCAC_u", **base), LIMITS)
            ac = solve_control_exact(
                ControlInstance(problem="CCAC", k=len(spoilers), **base), LIMITS)
            assert (acu is None) == (ac is None)

    def test_goal_override(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b"), 2), LinearOrder(("b", "a"), 1)))
        inst = ControlInstance("CCDV", NONUNIQUE, HALF, e, "a", k=1,
                               goal=ScoreOrder((("a", "<", "b"),)))
        witness = solve_control_exact(inst, LIMITS)
        assert witness is None  # deleting one ballot can at best tie the scores

    def test_partition_problems(self):
        e = Election(("a", "b", "c"), (
            LinearOrder(("a", "b", "c")), LinearOrder(("b", "c", "a")),
            LinearOrder(("c", "a", "b"))))
        for prob in ("CCPC-TP", "CCPC-TE", "CCRPC-TP", "CCRPC-TE"):
            inst = ControlInstance(prob, UNIQUE, HALF, e, "a")
            witness = solve_control_exact(inst, LIMITS)
            # isolating b lets a beat c in its part and win the final alone
            assert witness is not None, prob


class TestWitnessesReverify:
    def test_random_instances(self, rng):
        problems = ("CCDC", "DCDC", "CCDV", "DCAV", "CCPC-TP", "DCRPC-TE", "CCPV-TP")
        checked = 0
        for _ in range(120):
            e = random_election(rng, max_candidates=5, max_units=5)
            prob = rng.choice(problems)
            kind = prob[2:]
            p = rng.choice(e.candidates)
            pool = (LinearOrder(tuple(e.candidates)),) if kind == "AV" else ()
            k = rng.randrange(0, 3) if kind in ("AC", "DC", "AV", "DV") else None
            inst = ControlInstance(prob, rng.choice((NONUNIQUE, UNIQUE)), HALF, e, p,
                                   pool=pool, k=k)
            witness = solve_control_exact(inst, LIMITS)
            if witness is not None:
                assert apply_witness(inst, witness)
                checked += 1
        assert checked > 20


class TestBribery:
    def test_spec_examples(self):
        e = Election(("a", "b"), (LinearOrder(("b", "a"), 3),))
        assert solve_bribery_exact(e, HALF, "a", 2, "CC", NONUNIQUE, LIMITS) is not None
        assert solve_bribery_exact(e, HALF, "a", 1, "CC", NONUNIQUE, LIMITS) is None

    def test_zero_budget(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b"), 1),))
        assert solve_bribery_exact(e, HALF, "a", 0, "CC", NONUNIQUE, LIMITS) is not None
        assert solve_bribery_exact(e, HALF, "b", 0, "CC", NONUNIQUE, LIMITS) is None

    def test_bribed_ballots_keep_kind(self):
        table = PreferenceTable.from_pairs([("b", "a")])
        e = Election(("a", "b"), (table, table, LinearOrder(("b", "a"))))
        witness = solve_bribery_exact(e, HALF, "a", 2, "CC", NONUNIQUE, LIMITS)
        assert witness is not None
        units = list(e.unit_expand().ballots)
        for i, replacement in witness.replacements:
            assert type(units[i]) is type(replacement)


class TestMicrobribery:
    def test_spec_examples(self):
        tab = PreferenceTable.from_pairs([("p", "c")])
        e = Election(("p", "c"), (tab, tab, tab))
        assert solve_microbribery_exact(e, HALF, "p", 2, "DC", NONUNIQUE, LIMITS) is not None
        assert solve_microbribery_exact(e, HALF, "p", 1, "DC", NONUNIQUE, LIMITS) is None
        assert solve_microbribery_exact(e, HALF, "p", 0, "DC", NONUNIQUE, LIMITS) is None

    def test_even_tie_breaks_uniqueness(self):
        tab = PreferenceTable.from_pairs([("p", "c")])
        e = Election(("p", "c"), (tab,) * 4)
        assert solve_microbribery_exact(e, HALF, "p", 2, "DC", UNIQUE, LIMITS) is not None
        assert solve_microbribery_exact(e, HALF, "p", 1, "DC", UNIQUE, LIMITS) is None

    def test_requires_tables(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b")),))
        with pytest.raises(NotIrrational):
            solve_microbribery_exact(e, HALF, "a", 1, "DC", NONUNIQUE, LIMITS)


class TestBudgets:
    def test_subset_budget(self):
        e = random_election(random.Random(1), max_candidates=8, max_units=3)
        inst = ControlInstance("CCRPC-TP", NONUNIQUE, HALF, e, e.candidates[0])
        with pytest.raises(BudgetExceeded):
            solve_control_exact(inst, SizeLimits(max_subsets=2))

    def test_voter_budget(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b"), 10**9),))
        inst = ControlInstance("CCDV", NONUNIQUE, HALF, e, "a", k=1)
        with pytest.raises(BudgetExceeded):
            solve_control_exact(inst, LIMITS)

    def test_monotone_budgets(self, rng):
        for _ in range(25):
            e = random_election(rng, max_candidates=4, max_units=5)
            p = rng.choice(e.candidates)
            prev = None
            for k in range(0, 4):
                inst = ControlInstance("DCDV", NONUNIQUE, HALF, e, p, k=k)
                got = solve_control_exact(inst, LIMITS) is not None
                if prev is True:
                    assert got, "YES at k must stay YES at k+1"
                prev = got
