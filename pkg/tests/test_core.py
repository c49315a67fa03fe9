import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from copeland.core import (
    Alpha,
    CandidatePartition,
    Election,
    EmptyCandidateSet,
    ExactScaledScores,
    GroupDominance,
    LinearOrder,
    MakeUniqueWinner,
    MakeWinner,
    NONUNIQUE,
    NotAPartition,
    PrecludeUniqueWinner,
    PrecludeWinner,
    PreferenceTable,
    RunoffCandidatePartition,
    SameCandidate,
    ScoreOrder,
    TE,
    TP,
    UNIQUE,
    UnknownCandidate,
    VoterPartition,
    copeland_scores,
    evaluate_goal,
    evaluate_two_stage,
    goal_for,
    outcome_table,
    pairwise_tally,
    winners,
)

HALF = Alpha(1, 2)


def e_cyc():
    return Election(("a", "b", "c"), (
        LinearOrder(("a", "b", "c")),
        LinearOrder(("b", "c", "a")),
        LinearOrder(("c", "a", "b")),
    ))


def e_tie():
    return Election(("a", "b"), (LinearOrder(("a", "b")), LinearOrder(("b", "a"))))


class TestAlpha:
    def test_parse_and_str(self):
        assert Alpha.parse("1/2") == Alpha(1, 2)
        assert str(Alpha.of(2, 4)) == "1/2"

    @pytest.mark.parametrize("num,den", [(2, 4), (3, 2), (1, 0)])
    def test_invalid(self, num, den):
        with pytest.raises(ValueError):
            Alpha(num, den)

    def test_bounds(self):
        assert Alpha(0, 1).num == 0
        assert Alpha(1, 1).den == 1


class TestPairwiseTally:
    def test_cycle(self):
        assert pairwise_tally(e_cyc(), "a", "b") == 2

    def test_empty_ballots(self):
        e = Election(("a", "b"), ())
        assert pairwise_tally(e, "a", "b") == 0

    def test_multiplicity(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b"), 3),))
        assert pairwise_tally(e, "a", "b") == 3

    def test_errors(self):
        with pytest.raises(SameCandidate):
            pairwise_tally(e_cyc(), "a", "a")
        with pytest.raises(UnknownCandidate):
            pairwise_tally(e_cyc(), "a", "z")


class TestOutcomeTable:
    def test_cycle_results(self):
        t = outcome_table(e_cyc())
        assert t.result("a", "b") == 1 and t.tally("a", "b") == 2 and t.tally("b", "a") == 1
        assert t.result("b", "c") == 1
        assert t.result("c", "a") == 1

    def test_two_way_tie(self):
        t = outcome_table(e_tie())
        assert t.result("a", "b") == 0
        assert t.tally("a", "b") == t.tally("b", "a") == 1

    def test_zero_ballots(self):
        t = outcome_table(Election(("a", "b"), ()))
        assert t.result("a", "b") == 0
        assert t.tally("a", "b") == 0

    def test_table_ballots(self):
        e = Election(("a", "b", "c"),
                     (PreferenceTable.from_pairs([("a", "b"), ("b", "c"), ("c", "a")]),))
        t = outcome_table(e)
        assert t.result("a", "b") == 1 and t.result("c", "a") == 1


class TestScoresAndWinners:
    def test_cycle_scores(self):
        for alpha in (Alpha(0, 1), HALF, Alpha(1, 1)):
            scores = copeland_scores(e_cyc(), alpha).scaled
            assert set(scores.values()) == {alpha.den}

    def test_tie_scores(self):
        scores = copeland_scores(e_tie(), HALF).scaled
        assert scores == {"a": 1, "b": 1}

    def test_winners_models(self):
        assert winners(e_cyc(), HALF, NONUNIQUE) == {"a", "b", "c"}
        assert winners(e_cyc(), HALF, UNIQUE) == frozenset()
        single = Election(("p",), ())
        assert winners(single, HALF, NONUNIQUE) == {"p"}
        assert winners(single, HALF, UNIQUE) == {"p"}

    def test_empty_candidates(self):
        with pytest.raises(EmptyCandidateSet):
            winners(Election((), ()), HALF)


class TestTwoStage:
    def test_runoff_cycle(self):
        win = evaluate_two_stage(
            e_cyc(), RunoffCandidatePartition(("a", "b"), ("c",)), TP, HALF)
        assert win == {"c"}

    def test_empty_second_part(self):
        e = e_cyc()
        win = evaluate_two_stage(
            e, RunoffCandidatePartition(e.candidates, ()), TP, HALF)
        assert win == winners(e, HALF)

    def test_te_singletons_survive(self):
        win = evaluate_two_stage(
            e_tie(), RunoffCandidatePartition(("a",), ("b",)), TE, HALF)
        assert win == {"a", "b"}

    def test_te_eliminates_tied_part(self):
        # both candidates tie in the first part, so neither survives
        e = Election(("a", "b", "z"), (
            LinearOrder(("a", "b", "z")), LinearOrder(("b", "a", "z"))))
        win = evaluate_two_stage(e, RunoffCandidatePartition(("a", "b"), ("z",)), TE, HALF)
        assert win == {"z"}

    def test_candidate_partition_second_unfiltered(self):
        # survivors of the first part meet all of the second part
        e = e_cyc()
        win = evaluate_two_stage(e, CandidatePartition(("a", "b"), ("c",)), TP, HALF)
        assert win == {"c"}

    def test_voter_partition(self):
        e = e_cyc()
        b = e.ballots
        win = evaluate_two_stage(e, VoterPartition((b[0],), (b[1], b[2])), TP, HALF)
        assert win  # some winner set over the full voter set

    def test_not_a_partition(self):
        e = e_cyc()
        with pytest.raises(NotAPartition):
            evaluate_two_stage(e, RunoffCandidatePartition(("a",), ("c",)), TP, HALF)
        with pytest.raises(NotAPartition):
            evaluate_two_stage(e, VoterPartition((e.ballots[0],), ()), TP, HALF)

    def test_unique_model_interpretation(self):
        win = evaluate_two_stage(
            e_tie(), RunoffCandidatePartition(("a",), ("b",)), TE, HALF, UNIQUE)
        assert win == frozenset()


class TestGoals:
    def test_winner_goals_on_cycle(self):
        t = outcome_table(e_cyc())
        assert evaluate_goal(t, HALF, MakeWinner("a"))
        assert not evaluate_goal(t, HALF, MakeUniqueWinner("a"))
        assert not evaluate_goal(t, HALF, PrecludeWinner("a"))
        assert evaluate_goal(t, HALF, PrecludeUniqueWinner("a"))

    def test_empty_score_order(self):
        assert evaluate_goal(outcome_table(e_cyc()), HALF, ScoreOrder(()))

    def test_score_order(self):
        e = Election(("a", "b"), (LinearOrder(("a", "b")),))
        t = outcome_table(e)
        assert evaluate_goal(t, HALF, ScoreOrder((("b", "<", "a"),)))
        assert not evaluate_goal(t, HALF, ScoreOrder((("a", "<=", "b"),)))

    def test_score_order_rejects_strict_cycle(self):
        with pytest.raises(ValueError):
            ScoreOrder((("a", "<", "b"), ("b", "<=", "a")))
        ScoreOrder((("a", "<=", "b"), ("b", "<=", "a")))  # weak cycle is fine

    def test_exact_scores_and_dominance(self):
        t = outcome_table(e_cyc())
        assert evaluate_goal(t, HALF, ExactScaledScores((("a", 2), ("b", 2))))
        assert not evaluate_goal(t, HALF, GroupDominance(frozenset("a"), frozenset("b")))

    def test_unknown_candidate_in_score_goal(self):
        with pytest.raises(UnknownCandidate):
            evaluate_goal(outcome_table(e_cyc()), HALF, ExactScaledScores((("z", 0),)))

    def test_goal_defaults(self):
        assert goal_for("CC", NONUNIQUE, "p") == MakeWinner("p")
        assert goal_for("CC", UNIQUE, "p") == MakeUniqueWinner("p")
        assert goal_for("DC", NONUNIQUE, "p") == PrecludeWinner("p")
        assert goal_for("DC", UNIQUE, "p") == PrecludeUniqueWinner("p")


# --- Property tests ---------------------------------------------------------


@st.composite
def elections(draw, max_candidates=6, max_ballots=6):
    n = draw(st.integers(1, max_candidates))
    names = tuple(f"c{i}" for i in range(n))
    ballots = []
    for _ in range(draw(st.integers(1, max_ballots))):
        mult = draw(st.integers(1, 3))
        if draw(st.booleans()):
            order = tuple(draw(st.permutations(names)))
            ballots.append(LinearOrder(order, mult))
        else:
            pairs = []
            for i, a in enumerate(names):
                for b in names[i + 1:]:
                    pairs.append((a, b) if draw(st.booleans()) else (b, a))
            ballots.append(PreferenceTable.from_pairs(pairs, mult))
    return Election(names, tuple(ballots))


@given(elections(), st.sampled_from([Alpha(0, 1), Alpha(1, 3), Alpha(1, 2), Alpha(1, 1)]))
@settings(max_examples=60, deadline=None)
def test_score_sum_identity(e, alpha):
    t = outcome_table(e)
    scores = t.scaled_scores(alpha)
    n = len(e.candidates)
    decisive = sum(
        1 for i, a in enumerate(e.candidates) for b in e.candidates[i + 1:]
        if t.result(a, b) != 0)
    tied = n * (n - 1) // 2 - decisive
    assert sum(scores.values()) == alpha.den * decisive + 2 * alpha.num * tied


@given(elections(), st.sampled_from([Alpha(1, 3), Alpha(1, 2)]))
@settings(max_examples=50, deadline=None)
def test_score_decomposition(e, alpha):
    scores = copeland_scores(e, alpha).scaled
    for c in e.candidates:
        parts = 0
        for d in e.candidates:
            if d == c:
                continue
            sub = e.restrict((c, d))
            parts += copeland_scores(sub, alpha).scaled[c]
        assert parts == scores[c]


@given(elections(max_candidates=5), st.data())
@settings(max_examples=50, deadline=None)
def test_neutrality_under_relabeling(e, data):
    alpha = HALF
    perm = data.draw(st.permutations(e.candidates))
    mapping = dict(zip(e.candidates, perm))

    def rename(b):
        if isinstance(b, LinearOrder):
            return LinearOrder(tuple(mapping[c] for c in b.order), b.multiplicity)
        return PreferenceTable.from_pairs(
            [(mapping[a], mapping[x]) for a, x in b.prefs], b.multiplicity)

    renamed = Election(perm, tuple(rename(b) for b in e.ballots))
    base = copeland_scores(e, alpha).scaled
    new = copeland_scores(renamed, alpha).scaled
    assert all(new[mapping[c]] == base[c] for c in e.candidates)
    assert winners(renamed, alpha) == {mapping[c] for c in winners(e, alpha)}


@given(elections())
@settings(max_examples=50, deadline=None)
def test_multiplicity_split_invariance(e):
    alpha = Alpha(1, 3)
    split = e.unit_expand()
    assert copeland_scores(e, alpha).scaled == copeland_scores(split, alpha).scaled
    for i, a in enumerate(e.candidates):
        for b in e.candidates[i + 1:]:
            assert pairwise_tally(e, a, b) == pairwise_tally(split, a, b)


@given(elections(max_candidates=6))
@settings(max_examples=60, deadline=None)
def test_odd_linear_elections_are_alpha_independent(e):
    if not all(isinstance(b, LinearOrder) for b in e.ballots):
        return
    if e.total_multiplicity() % 2 == 0:
        return
    t = outcome_table(e)
    assert all(
        t.result(a, b) != 0
        for i, a in enumerate(e.candidates) for b in e.candidates[i + 1:])
    reference = None
    for alpha in (Alpha(0, 1), Alpha(1, 3), Alpha(1, 2), Alpha(1, 1)):
        scores = copeland_scores(e, alpha).scaled
        scaled_free = {c: v // alpha.den for c, v in scores.items()}
        win = winners(e, alpha)
        if reference is None:
            reference = (scaled_free, win)
        else:
            assert reference == (scaled_free, win)


@given(elections(), st.sampled_from([Alpha(0, 1), Alpha(1, 2), Alpha(1, 1)]))
@settings(max_examples=60, deadline=None)
def test_unique_winner_subset(e, alpha):
    nonunique = winners(e, alpha, NONUNIQUE)
    unique = winners(e, alpha, UNIQUE)
    assert nonunique
    assert unique <= nonunique
    assert len(unique) <= 1
