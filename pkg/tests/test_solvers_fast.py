import pytest

from copeland.core import (
    Alpha,
    Election,
    LinearOrder,
    NONUNIQUE,
    NotIrrational,
    PreferenceTable,
    ScoreOrder,
    UNIQUE,
)
from copeland.realize import DesiredOutcomes, realize_outcomes
from copeland.reductions import ControlInstance, DeletedCandidates
from copeland.solvers_exact import SizeLimits, solve_control_exact, solve_microbribery_exact
from copeland.solvers_fast import (
    BoundParameter,
    BoundViolated,
    WrongProblem,
    destructive_microbribery_dp,
    destructive_partition_candidate,
    fpt_candidate_control,
    fpt_voter_control,
    greedy_destructive_candidate,
)
from conftest import ALPHA_GRID, random_election, random_pattern_election

HALF = Alpha(1, 2)
LIMITS = SizeLimits(max_subsets=1 << 22)


def cycle_election():
    # p beats d, d beats c, c beats p
    return realize_outcomes(DesiredOutcomes.from_beats(
        ("p", "d", "c"), [("p", "d"), ("d", "c"), ("c", "p")]))


class TestGreedy:
    def test_dcdc_cycle(self):
        inst = ControlInstance("DCDC", NONUNIQUE, HALF, cycle_election(), "p", k=1)
        witness = greedy_destructive_candidate(inst)
        assert witness == DeletedCandidates(frozenset(["d"]))

    def test_zero_budget_already_failing(self):
        e = realize_outcomes(DesiredOutcomes.from_beats(("p", "q"), [("q", "p")]))
        inst = ControlInstance("DCDC", NONUNIQUE, HALF, e, "p", k=0)
        assert greedy_destructive_candidate(inst) == DeletedCandidates(frozenset())

    def test_dcac_spec_example(self):
        # C = {p, c} with p beating c; spoiler d beats p and ties c
        spec = DesiredOutcomes(("p", "c", "d"))
        spec.set_beats("p", "c")
        spec.set_beats("d", "p")
        e = realize_outcomes(spec)
        inst = ControlInstance("DCAC", UNIQUE, HALF, e, "p", spoilers=("d",), k=1)
        witness = greedy_destructive_candidate(inst)
        assert witness is not None and witness.candidates == frozenset(["d"])

    def test_wrong_problem(self):
        inst = ControlInstance("CCDC", NONUNIQUE, HALF, cycle_election(), "p", k=1)
        with pytest.raises(WrongProblem):
            greedy_destructive_candidate(inst)

    def test_matches_exact(self, rng):
        for _ in range(150):
            e = random_pattern_election(rng, rng.randrange(2, 6))
            model = rng.choice((NONUNIQUE, UNIQUE))
            alpha = rng.choice(ALPHA_GRID)
            inst = ControlInstance("DCDC", model, alpha, e, e.candidates[0],
                                   k=rng.randrange(0, 3))
            assert (greedy_destructive_candidate(inst) is None) == \
                   (solve_control_exact(inst, LIMITS) is None)


class TestPartition:
    def test_identity_partition_when_p_already_loses(self):
        e = realize_outcomes(DesiredOutcomes.from_beats(("p", "q"), [("q", "p")]))
        for prob in ("DCPC-TP", "DCPC-TE", "DCRPC-TP", "DCRPC-TE"):
            inst = ControlInstance(prob, NONUNIQUE, HALF, e, "p")
            assert destructive_partition_candidate(inst) is not None

    def test_cycle_isolation(self):
        e = Election(("a", "b", "c"), (
            LinearOrder(("a", "b", "c")), LinearOrder(("b", "c", "a")),
            LinearOrder(("c", "a", "b"))))
        inst = ControlInstance("DCRPC-TP", NONUNIQUE, HALF, e, "a")
        assert destructive_partition_candidate(inst) is not None

    def test_sole_candidate_is_safe(self):
        e = Election(("p",), ())
        inst = ControlInstance("DCRPC-TP", NONUNIQUE, HALF, e, "p")
        assert destructive_partition_candidate(inst) is None

    def test_matches_exact(self, rng):
        for _ in range(150):
            e = random_pattern_election(rng, rng.randrange(1, 6))
            model = rng.choice((NONUNIQUE, UNIQUE))
            alpha = rng.choice(ALPHA_GRID)
            prob = rng.choice(("DCPC-TP", "DCPC-TE", "DCRPC-TP", "DCRPC-TE"))
            inst = ControlInstance(prob, model, alpha, e, e.candidates[0])
            assert (destructive_partition_candidate(inst) is None) == \
                   (solve_control_exact(inst, LIMITS) is None), (prob, model, alpha)


class TestMicrobriberyDP:
    def test_spec_examples(self):
        tab = PreferenceTable.from_pairs([("p", "c")])
        e = Election(("p", "c"), (tab, tab, tab))
        assert destructive_microbribery_dp(e, HALF, "p", 2, NONUNIQUE) is not None
        assert destructive_microbribery_dp(e, HALF, "p", 1, NONUNIQUE) is None
        e4 = Election(("p", "c"), (tab,) * 4)
        assert destructive_microbribery_dp(e4, HALF, "p", 2, UNIQUE) is not None

    def test_zero_budget(self):
        tab = PreferenceTable.from_pairs([("c", "p")])
        e = Election(("p", "c"), (tab,))
        assert destructive_microbribery_dp(e, HALF, "p", 0, NONUNIQUE) is not None

    def test_rejects_linear_orders(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b")),))
        with pytest.raises(NotIrrational):
            destructive_microbribery_dp(e, HALF, "a", 1)

    def test_matches_exact(self, rng):
        names = ("p", "a", "b")
        pairs = (("p", "a"), ("p", "b"), ("a", "b"))
        for _ in range(120):
            ballots = tuple(
                PreferenceTable.from_pairs(
                    [(x, y) if rng.random() < 0.5 else (y, x) for x, y in pairs])
                for _ in range(rng.randrange(1, 4)))
            e = Election(names, ballots)
            alpha = rng.choice(ALPHA_GRID)
            model = rng.choice((NONUNIQUE, UNIQUE))
            k = rng.randrange(0, 3)
            fast = destructive_microbribery_dp(e, alpha, "p", k, model)
            slow = solve_microbribery_exact(e, alpha, "p", k, "DC", model, LIMITS)
            assert (fast is None) == (slow is None)


class TestFPT:
    def test_ccav_bc2(self):
        e = Election(("p", "q"), (LinearOrder(("q", "p")),))
        pool = (LinearOrder(("p", "q")), LinearOrder(("p", "q")))
        inst = ControlInstance("CCAV", NONUNIQUE, HALF, e, "p", pool=pool, k=2)
        assert fpt_voter_control(inst, BoundParameter("BC", 2)) is not None

    def test_dcdv_zero_budget(self):
        e = Election(("p", "q"), (LinearOrder(("q", "p")),))
        inst = ControlInstance("DCDV", NONUNIQUE, HALF, e, "p", k=0)
        assert fpt_voter_control(inst, BoundParameter("BV", 4)) is not None

    def test_ccpv_te_matches_exact(self):
        e = Election(("a", "b", "c"), (
            LinearOrder(("a", "b", "c")), LinearOrder(("b", "c", "a")),
            LinearOrder(("c", "a", "b"))))
        inst = ControlInstance("CCPV-TE", UNIQUE, HALF, e, "a")
        fast = fpt_voter_control(inst, BoundParameter("BV", 3))
        slow = solve_control_exact(inst, LIMITS)
        assert (fast is None) == (slow is None)

    def test_ccdc_cycle_bc3(self):
        e = Election(("a", "b", "c"), (
            LinearOrder(("a", "b", "c")), LinearOrder(("b", "c", "a")),
            LinearOrder(("c", "a", "b"))))
        inst = ControlInstance("CCDC", UNIQUE, HALF, e, "a", k=1)
        witness = fpt_candidate_control(inst, BoundParameter("BC", 3))
        assert witness == DeletedCandidates(frozenset(["c"]))

    def test_acu_empty_pool(self):
        e = Election(("p", "q"), (LinearOrder(("p", "q")),))
        inst = ControlInstance("CCAC_u", NONUNIQUE, HALF, e, "p", spoilers=())
        assert fpt_candidate_control(inst, BoundParameter("BC", 2)) is not None

    def test_bound_violations(self):
        e = Election(("a", "b", "c"), (LinearOrder(("a", "b", "c")),))
        inst = ControlInstance("CCDC", NONUNIQUE, HALF, e, "a", k=1)
        with pytest.raises(BoundViolated):
            fpt_candidate_control(inst, BoundParameter("BC", 2))
        vinst = ControlInstance("CCDV", NONUNIQUE, HALF, e, "a", k=1)
        with pytest.raises(BoundViolated):
            fpt_voter_control(vinst, BoundParameter("BC", 2))
        with pytest.raises(WrongProblem):
            fpt_voter_control(inst, BoundParameter("BV", 8))
        with pytest.raises(ValueError):
            BoundParameter("BX", 3)

    def test_succinct_multiplicities(self):
        big = 10 ** 12
        e = Election(("a", "b"),
                     (LinearOrder(("a", "b"), big), LinearOrder(("b", "a"), big + 2)))
        inst = ControlInstance("CCDV", NONUNIQUE, HALF, e, "a", k=2)
        witness = fpt_voter_control(inst, BoundParameter("BC", 2))
        assert witness is not None
        inst1 = ControlInstance("CCDV", NONUNIQUE, HALF, e, "a", k=1)
        assert fpt_voter_control(inst1, BoundParameter("BC", 2)) is None

    def test_extended_goal(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b"), 2), LinearOrder(("b", "a"), 1)))
        inst = ControlInstance("CCDV", NONUNIQUE, HALF, e, "b", k=1)
        goal = ScoreOrder((("a", "<=", "b"),))
        witness = fpt_voter_control(inst, BoundParameter("BC", 2), goal=goal)
        assert witness is not None

    def test_unit_expansion_invariance(self, rng):
        for _ in range(30):
            e = random_election(rng, max_candidates=3, max_units=6, table_ok=False)
            p = rng.choice(e.candidates)
            k = rng.randrange(0, 3)
            inst = ControlInstance("CCDV", NONUNIQUE, HALF, e, p, k=k)
            expanded = ControlInstance(
                "CCDV", NONUNIQUE, HALF, e.unit_expand(), p, k=k)
            a = fpt_voter_control(inst, BoundParameter("BC", 3))
            b = fpt_voter_control(expanded, BoundParameter("BC", 3))
            c = solve_control_exact(inst, LIMITS)
            assert (a is None) == (b is None) == (c is None)
