"""Election data model and exact Copeland^alpha scoring.

Scores are kept as scaled integers: with the tie reward written as the
reduced fraction s/t, a candidate with w pairwise wins and x pairwise ties
has scaled score t*w + s*x.  All comparisons are exact; no floats anywhere.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from . import _tally

NONUNIQUE = "nonunique"
UNIQUE = "unique"
MODELS = (NONUNIQUE, UNIQUE)

TP = "TP"
TE = "TE"
RULES = (TP, TE)

_ID_RE = re.compile(r"[A-Za-z0-9_]+\Z")


class ElectionError(ValueError):
    pass


class UnknownCandidate(ElectionError):
    pass


class SameCandidate(ElectionError):
    pass


class DuplicateCandidate(ElectionError):
    pass


class EmptyCandidateSet(ElectionError):
    pass


class NotAPartition(ElectionError):
    pass


class NotIrrational(ElectionError):
    """Raised when an operation needs preference-table ballots only."""


@dataclass(frozen=True)
class Alpha:
    """Tie reward s/t with 0 <= s <= t, gcd(s, t) = 1."""

    num: int
    den: int

    def __post_init__(self):
        if self.den < 1 or self.num < 0 or self.num > self.den:
            raise ValueError(f"alpha must lie in [0, 1]: {self.num}/{self.den}")
        if math.gcd(self.num, self.den) != 1:
            raise ValueError(f"alpha not in lowest terms: {self.num}/{self.den}")

    @classmethod
    def of(cls, num: int, den: int) -> "Alpha":
        if den == 0:
            raise ValueError("zero denominator")
        g = math.gcd(num, den)
        return cls(num // g, den // g)

    @classmethod
    def parse(cls, text: str) -> "Alpha":
        m = re.fullmatch(r"\s*(\d+)\s*/\s*(\d+)\s*", text)
        if not m:
            raise ValueError(f"bad alpha {text!r}, expected S/T")
        return cls.of(int(m.group(1)), int(m.group(2)))

    def __str__(self):
        return f"{self.num}/{self.den}"


ALPHA_HALF = Alpha(1, 2)


def _check_token(name: str) -> str:
    if not _ID_RE.match(name):
        raise ElectionError(f"bad candidate id {name!r}")
    return name


@dataclass(frozen=True)
class LinearOrder:
    """Rational ballot: a strict ranking, most preferred first."""

    order: tuple
    multiplicity: int = 1

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ElectionError("multiplicity must be >= 1")
        if len(set(self.order)) != len(self.order):
            raise ElectionError(f"order repeats a candidate: {self.order}")

    def prefers(self, a: str, b: str) -> bool:
        return self.order.index(a) < self.order.index(b)

    def restrict(self, keep: frozenset) -> "LinearOrder":
        return LinearOrder(tuple(c for c in self.order if c in keep), self.multiplicity)

    def with_multiplicity(self, m: int) -> "LinearOrder":
        return LinearOrder(self.order, m)

    def canonical_key(self):
        return ("order", self.order)


@dataclass(frozen=True)
class PreferenceTable:
    """Irrational ballot: one preferred candidate per unordered pair.

    ``prefs`` is a frozenset of (preferred, other) pairs covering every
    unordered pair of the election's candidate set exactly once.
    """

    prefs: frozenset
    multiplicity: int = 1

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ElectionError("multiplicity must be >= 1")
        seen = set()
        for a, b in self.prefs:
            key = frozenset((a, b))
            if a == b or key in seen:
                raise ElectionError("preference table repeats or degenerates a pair")
            seen.add(key)

    @classmethod
    def from_pairs(cls, pairs: Iterable, multiplicity: int = 1) -> "PreferenceTable":
        return cls(frozenset((a, b) for a, b in pairs), multiplicity)

    @classmethod
    def from_order(cls, order: Sequence, multiplicity: int = 1) -> "PreferenceTable":
        pairs = [(order[i], order[j]) for i in range(len(order)) for j in range(i + 1, len(order))]
        return cls.from_pairs(pairs, multiplicity)

    def prefers(self, a: str, b: str) -> bool:
        return (a, b) in self.prefs

    def flip(self, a: str, b: str) -> "PreferenceTable":
        """Replace the (a, b) entry with its reverse."""
        if (a, b) in self.prefs:
            old, new = (a, b), (b, a)
        elif (b, a) in self.prefs:
            old, new = (b, a), (a, b)
        else:
            raise UnknownCandidate(f"pair ({a}, {b}) not in table")
        return PreferenceTable(self.prefs - {old} | {new}, self.multiplicity)

    def restrict(self, keep: frozenset) -> "PreferenceTable":
        return PreferenceTable(
            frozenset((a, b) for a, b in self.prefs if a in keep and b in keep),
            self.multiplicity,
        )

    def with_multiplicity(self, m: int) -> "PreferenceTable":
        return PreferenceTable(self.prefs, m)

    def canonical_key(self):
        return ("table", tuple(sorted(self.prefs)))


Ballot = Union[LinearOrder, PreferenceTable]


class Election:
    """A candidate tuple plus a ballot sequence ranging over exactly it."""

    __slots__ = ("candidates", "ballots", "_index")

    def __init__(self, candidates: Sequence, ballots: Sequence, validate: bool = True):
        self.candidates = tuple(candidates)
        self.ballots = ballots if hasattr(ballots, "margin_result") else tuple(ballots)
        self._index = {c: i for i, c in enumerate(self.candidates)}
        if len(self._index) != len(self.candidates):
            raise DuplicateCandidate("duplicate candidate id")
        for c in self.candidates:
            _check_token(c)
        if validate and not hasattr(ballots, "margin_result"):
            cset = frozenset(self.candidates)
            npairs = len(self.candidates) * (len(self.candidates) - 1) // 2
            for ballot in self.ballots:
                if isinstance(ballot, LinearOrder):
                    if frozenset(ballot.order) != cset:
                        raise ElectionError(f"ballot is not a permutation of the candidates: {ballot.order}")
                elif isinstance(ballot, PreferenceTable):
                    if len(ballot.prefs) != npairs or any(
                        a not in cset or b not in cset for a, b in ballot.prefs
                    ):
                        raise ElectionError("preference table does not cover the candidate pairs")
                else:
                    raise ElectionError(f"not a ballot: {ballot!r}")

    def index(self, c: str) -> int:
        try:
            return self._index[c]
        except KeyError:
            raise UnknownCandidate(c) from None

    def __contains__(self, c):
        return c in self._index

    def __eq__(self, other):
        return (
            isinstance(other, Election)
            and self.candidates == other.candidates
            and list(self.ballots) == list(other.ballots)
        )

    def __hash__(self):
        return hash((self.candidates, tuple(self.ballots)))

    def __repr__(self):
        return f"Election({len(self.candidates)} candidates, {len(self.ballots)} ballots)"

    def total_multiplicity(self) -> int:
        if hasattr(self.ballots, "total_multiplicity"):
            return self.ballots.total_multiplicity()
        return sum(b.multiplicity for b in self.ballots)

    def restrict(self, keep: Iterable) -> "Election":
        keep = [c for c in self.candidates if c in frozenset(keep)]
        kept = frozenset(keep)
        if hasattr(self.ballots, "restrict"):
            return Election(keep, self.ballots.restrict(kept), validate=False)
        return Election(
            keep,
            tuple(b.restrict(kept) for b in self.ballots),
            validate=False,
        )

    def unit_expand(self) -> "Election":
        """Split every ballot of multiplicity m into m unit ballots."""
        units = []
        for b in self.ballots:
            units.extend([b.with_multiplicity(1)] * b.multiplicity)
        return Election(self.candidates, tuple(units), validate=False)

    def all_tables(self) -> bool:
        return all(isinstance(b, PreferenceTable) for b in self.ballots)


class OutcomeTable:
    """Pairwise tallies and strict-majority results for all candidate pairs.

    ``result(a, b)`` is +1 if a beats b, -1 if b beats a, 0 on a tie.
    Tallies are exact; very large multiplicities fall back to Python ints.
    """

    __slots__ = ("candidates", "_index", "total", "_res", "_tally", "_base_count",
                 "_win_masks", "_tie_masks")

    def __init__(self, candidates, res_matrix, total, tally=None, base_count=None):
        self.candidates = tuple(candidates)
        self._index = {c: i for i, c in enumerate(self.candidates)}
        self.total = total
        self._res = res_matrix  # np.int8, antisymmetric
        self._tally = tally
        self._base_count = base_count  # margin-2 tables: tally = base_count + res
        self._win_masks = None
        self._tie_masks = None

    @classmethod
    def from_margins(cls, candidates, res_matrix, pair_count):
        """Table of a McGarvey election: every enforced pair at margin 2."""
        return cls(candidates, res_matrix, 2 * pair_count, base_count=pair_count)

    def index(self, c: str) -> int:
        try:
            return self._index[c]
        except KeyError:
            raise UnknownCandidate(c) from None

    def result(self, a: str, b: str) -> int:
        return int(self._res[self.index(a), self.index(b)])

    @property
    def result_matrix(self):
        return self._res

    def tally(self, a: str, b: str) -> int:
        i, j = self.index(a), self.index(b)
        if i == j:
            raise SameCandidate(a)
        if self._tally is not None:
            return self._tally[i][j]
        return self._base_count + int(self._res[i, j])

    def tally_matrix(self):
        n = len(self.candidates)
        if self._tally is not None:
            return self._tally
        m = [[0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i != j:
                    m[i][j] = self._base_count + int(self._res[i, j])
        return m

    def wins_and_ties(self):
        """Per-candidate win and tie counts as numpy int64 vectors."""
        wins = (self._res > 0).sum(axis=1).astype(np.int64)
        ties = (self._res == 0).sum(axis=1).astype(np.int64) - 1  # drop the diagonal
        return wins, ties

    def win_masks(self):
        if self._win_masks is None:
            self._win_masks = _rows_to_masks(self._res > 0)
        return self._win_masks

    def tie_masks(self):
        if self._tie_masks is None:
            eye = np.eye(len(self.candidates), dtype=bool)
            self._tie_masks = _rows_to_masks((self._res == 0) & ~eye)
        return self._tie_masks

    def scaled_scores(self, alpha: Alpha) -> dict:
        wins, ties = self.wins_and_ties()
        t, s = alpha.den, alpha.num
        return {
            c: t * int(wins[i]) + s * int(ties[i])
            for i, c in enumerate(self.candidates)
        }

    def restrict(self, keep: Iterable) -> "OutcomeTable":
        kept = frozenset(keep)
        idx = [i for i, c in enumerate(self.candidates) if c in kept]
        sub = self._res[np.ix_(idx, idx)]
        tally = None
        if self._tally is not None:
            tally = [[self._tally[i][j] for j in idx] for i in idx]
        return OutcomeTable(
            [self.candidates[i] for i in idx], sub, self.total,
            tally=tally, base_count=self._base_count,
        )


def _rows_to_masks(bool_matrix) -> list:
    packed = np.packbits(np.ascontiguousarray(bool_matrix), axis=1, bitorder="little")
    return [int.from_bytes(row.tobytes(), "little") for row in packed]


def pairwise_tally(election: Election, a: str, b: str) -> int:
    """Total multiplicity of ballots preferring a to b."""
    ia, ib = election.index(a), election.index(b)
    if ia == ib:
        raise SameCandidate(a)
    if hasattr(election.ballots, "margin_result"):
        return election.ballots.pair_tally(a, b)
    total = 0
    for ballot in election.ballots:
        if ballot.prefers(a, b):
            total += ballot.multiplicity
    return total


def outcome_table(election: Election) -> OutcomeTable:
    """Tally all head-to-head contests and apply the strict-majority rule."""
    if not election.candidates:
        raise EmptyCandidateSet("no candidates")
    ballots = election.ballots
    if hasattr(ballots, "margin_result"):
        return OutcomeTable.from_margins(
            election.candidates, ballots.margin_result(), ballots.pair_count()
        )
    n = len(election.candidates)
    idx = election._index
    linear = [b for b in ballots if isinstance(b, LinearOrder)]
    tables = [b for b in ballots if isinstance(b, PreferenceTable)]
    total = sum(b.multiplicity for b in ballots)

    if total < (1 << 60) and n > 0:
        tally = np.zeros((n, n), dtype=np.int64)
        if linear:
            lookup = idx.__getitem__
            flat = []
            for b in linear:
                flat.extend(map(lookup, b.order))
            orders = np.array(flat, dtype=np.int32).reshape(len(linear), n)
            mults = np.array([b.multiplicity for b in linear], dtype=np.int64)
            _tally.accumulate_linear(orders, mults, tally)
        for b in tables:
            for a, c in b.prefs:
                tally[idx[a], idx[c]] += b.multiplicity
        res = np.sign(2 * tally - total).astype(np.int8) if total else np.zeros((n, n), np.int8)
        np.fill_diagonal(res, 0)
        return OutcomeTable(election.candidates, res, total,
                            tally=[[int(x) for x in row] for row in tally])

    # Arbitrary-precision path for succinct multiplicities.
    tally = [[0] * n for _ in range(n)]
    for b in ballots:
        if isinstance(b, LinearOrder):
            order = [idx[c] for c in b.order]
            m = b.multiplicity
            for i in range(n):
                row = tally[order[i]]
                for j in range(i + 1, n):
                    row[order[j]] += m
        else:
            for a, c in b.prefs:
                tally[idx[a]][idx[c]] += b.multiplicity
    res = np.zeros((n, n), dtype=np.int8)
    for i in range(n):
        for j in range(n):
            if i != j:
                d = 2 * tally[i][j] - total
                res[i, j] = 1 if d > 0 else (-1 if d < 0 else 0)
    return OutcomeTable(election.candidates, res, total, tally=tally)


@dataclass(frozen=True)
class ScoreVector:
    """Exact scaled scores: scaled(c) = t*wins(c) + s*ties(c)."""

    scaled: Mapping
    alpha: Alpha

    def __getitem__(self, c):
        return self.scaled[c]

    def score_str(self, c) -> str:
        return f"{self.scaled[c]}/{self.alpha.den}"


def copeland_scores(election: Election, alpha: Alpha) -> ScoreVector:
    table = outcome_table(election)
    return ScoreVector(table.scaled_scores(alpha), alpha)


def _check_model(model: str):
    if model not in MODELS:
        raise ValueError(f"bad winner model {model!r}")


def winners_from_table(table: OutcomeTable, alpha: Alpha, model: str = NONUNIQUE) -> frozenset:
    _check_model(model)
    if not table.candidates:
        return frozenset()
    scores = table.scaled_scores(alpha)
    top = max(scores.values())
    argmax = frozenset(c for c, v in scores.items() if v == top)
    if model == UNIQUE and len(argmax) != 1:
        return frozenset()
    return argmax


def winners(election: Election, alpha: Alpha, model: str = NONUNIQUE) -> frozenset:
    """Argmax set of scaled scores; under the unique model, only singletons."""
    if not election.candidates:
        raise EmptyCandidateSet("no candidates")
    return winners_from_table(outcome_table(election), alpha, model)


@dataclass(frozen=True)
class CandidatePartition:
    """Partition (C1, C2): survivors of C1 face all of C2 in the final."""

    first: tuple
    second: tuple


@dataclass(frozen=True)
class RunoffCandidatePartition:
    """Partition (C1, C2): survivors of both sides meet in the final."""

    first: tuple
    second: tuple


@dataclass(frozen=True)
class VoterPartition:
    """Partition of the ballot multiset into two sub-collections."""

    first: tuple
    second: tuple


Split = Union[CandidatePartition, RunoffCandidatePartition, VoterPartition]


def _survivors(table: Optional[OutcomeTable], alpha: Alpha, rule: str) -> frozenset:
    if table is None or not table.candidates:
        return frozenset()
    win = winners_from_table(table, alpha, NONUNIQUE)
    if rule == TP:
        return win
    return win if len(win) == 1 else frozenset()


def _check_candidate_partition(election, first, second):
    union = list(first) + list(second)
    if sorted(union) != sorted(election.candidates) or len(set(union)) != len(union):
        raise NotAPartition("candidate parts do not partition the candidate set")


def evaluate_two_stage(
    election: Election,
    split: Split,
    rule: str,
    alpha: Alpha,
    model: str = NONUNIQUE,
) -> frozenset:
    """Winners of the two-stage election under tie rule TP or TE.

    Final-round winners are computed under the nonunique rule; the result is
    then interpreted under ``model`` (unique: singleton argmax or nothing).
    """
    if rule not in RULES:
        raise ValueError(f"bad tie rule {rule!r}")
    _check_model(model)
    full = outcome_table(election)

    if isinstance(split, VoterPartition):
        def counted(ballots):
            acc = {}
            for b in ballots:
                acc[b.canonical_key()] = acc.get(b.canonical_key(), 0) + b.multiplicity
            return acc

        if counted(election.ballots) != counted(tuple(split.first) + tuple(split.second)):
            raise NotAPartition("ballot parts do not partition the ballot multiset")
        surv = frozenset()
        for side in (split.first, split.second):
            side_election = Election(election.candidates, tuple(side), validate=False)
            table = outcome_table(side_election) if election.candidates else None
            surv |= _survivors(table, alpha, rule)
        finalists = surv
    elif isinstance(split, RunoffCandidatePartition):
        _check_candidate_partition(election, split.first, split.second)
        surv1 = _survivors(full.restrict(split.first) if split.first else None, alpha, rule)
        surv2 = _survivors(full.restrict(split.second) if split.second else None, alpha, rule)
        finalists = surv1 | surv2
    elif isinstance(split, CandidatePartition):
        _check_candidate_partition(election, split.first, split.second)
        surv1 = _survivors(full.restrict(split.first) if split.first else None, alpha, rule)
        finalists = surv1 | frozenset(split.second)
    else:
        raise ValueError(f"bad split {split!r}")

    if not finalists:
        return frozenset()
    final_table = full.restrict([c for c in election.candidates if c in finalists])
    return winners_from_table(final_table, alpha, model)


# --- Goal specifications -------------------------------------------------

@dataclass(frozen=True)
class MakeWinner:
    candidate: str


@dataclass(frozen=True)
class MakeUniqueWinner:
    candidate: str


@dataclass(frozen=True)
class PrecludeWinner:
    candidate: str


@dataclass(frozen=True)
class PrecludeUniqueWinner:
    candidate: str


@dataclass(frozen=True)
class ScoreOrder:
    """Conjunction of pairwise score relations, each of '<', '<=', '='."""

    constraints: tuple

    def __post_init__(self):
        _check_score_order(self.constraints)


@dataclass(frozen=True)
class ExactScaledScores:
    scores: tuple  # ((candidate, scaled), ...)


@dataclass(frozen=True)
class GroupDominance:
    """Every member of ``above`` must outscore every member of ``below``."""

    above: frozenset
    below: frozenset


@dataclass(frozen=True)
class TablePredicate:
    """Extension hook: an opaque predicate over the outcome table."""

    fn: Callable


GoalSpec = Union[
    MakeWinner, MakeUniqueWinner, PrecludeWinner, PrecludeUniqueWinner,
    ScoreOrder, ExactScaledScores, GroupDominance, TablePredicate,
]


def _check_score_order(constraints):
    strict = []
    weak = []
    nodes = set()
    for a, rel, b in constraints:
        if rel not in ("<", "<=", "="):
            raise ValueError(f"bad relation {rel!r}")
        nodes.update((a, b))
        if rel == "=":
            weak.append((a, b))
            weak.append((b, a))
        else:
            weak.append((a, b))
            if rel == "<":
                strict.append((a, b))
    # Reject any cycle through a strict inequality: find strongly connected
    # components of the weak graph and forbid strict edges inside one.
    comp = _scc({n: [] for n in nodes}, weak)
    for a, b in strict:
        if comp[a] == comp[b]:
            raise ValueError("contradictory cycle of strict score inequalities")


def _scc(adj, edges):
    for a, b in edges:
        adj[a].append(b)
    index = {}
    low = {}
    comp = {}
    stack, onstack = [], set()
    counter = [0]
    ncomp = [0]

    def strongconnect(v):
        work = [(v, 0)]
        while work:
            node, pi = work[-1]
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                onstack.add(node)
            recurse = False
            for i in range(pi, len(adj[node])):
                w = adj[node][i]
                if w not in index:
                    work[-1] = (node, i + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                if w in onstack:
                    low[node] = min(low[node], index[w])
            if recurse:
                continue
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    onstack.discard(w)
                    comp[w] = ncomp[0]
                    if w == node:
                        break
                ncomp[0] += 1
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for v in adj:
        if v not in index:
            strongconnect(v)
    return comp


def goal_for(direction: str, model: str, candidate: str) -> GoalSpec:
    """Default goal for a control direction ('CC' or 'DC') and winner model."""
    if direction == "CC":
        return MakeUniqueWinner(candidate) if model == UNIQUE else MakeWinner(candidate)
    if direction == "DC":
        return PrecludeUniqueWinner(candidate) if model == UNIQUE else PrecludeWinner(candidate)
    raise ValueError(f"bad direction {direction!r}")


def evaluate_goal(table: OutcomeTable, alpha: Alpha, goal: GoalSpec) -> bool:
    """Whether the goal predicate holds for the table's scores and winners."""
    if isinstance(goal, TablePredicate):
        return bool(goal.fn(table))
    if isinstance(goal, (MakeWinner, MakeUniqueWinner, PrecludeWinner, PrecludeUniqueWinner)):
        c = goal.candidate
        if c not in table._index:
            # Winner goals are membership tests; a candidate missing from the
            # table (eliminated before a final round) simply is not a winner.
            return isinstance(goal, (PrecludeWinner, PrecludeUniqueWinner))
        win = winners_from_table(table, alpha, NONUNIQUE)
        if isinstance(goal, MakeWinner):
            return c in win
        if isinstance(goal, MakeUniqueWinner):
            return win == frozenset((c,))
        if isinstance(goal, PrecludeWinner):
            return c not in win
        return win != frozenset((c,))
    scores = table.scaled_scores(alpha)

    def get(c):
        if c not in scores:
            raise UnknownCandidate(c)
        return scores[c]

    if isinstance(goal, ScoreOrder):
        for a, rel, b in goal.constraints:
            x, y = get(a), get(b)
            if rel == "<" and not x < y:
                return False
            if rel == "<=" and not x <= y:
                return False
            if rel == "=" and x != y:
                return False
        return True
    if isinstance(goal, ExactScaledScores):
        return all(get(c) == v for c, v in goal.scores)
    if isinstance(goal, GroupDominance):
        if not goal.above or not goal.below:
            return True
        lo = min(get(c) for c in goal.above)
        hi = max(get(c) for c in goal.below)
        return lo > hi
    raise ValueError(f"bad goal {goal!r}")


def evaluate_goal_on_winners(win: frozenset, goal: GoalSpec) -> bool:
    """Goal check for two-stage outcomes, where only a winner set exists."""
    if isinstance(goal, MakeWinner):
        return goal.candidate in win
    if isinstance(goal, MakeUniqueWinner):
        return win == frozenset((goal.candidate,))
    if isinstance(goal, PrecludeWinner):
        return goal.candidate not in win
    if isinstance(goal, PrecludeUniqueWinner):
        return win != frozenset((goal.candidate,))
    raise ValueError(f"goal {goal!r} needs a full table, not a winner set")
