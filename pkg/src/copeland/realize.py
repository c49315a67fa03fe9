"""Build elections realizing prescribed head-to-head outcomes and scores.

The realization is McGarvey-style: each enforced win is produced by one
canceling ballot pair, so every enforced contest ends at margin exactly 2
and every unenforced contest ties.  Ballot lists are generated lazily; all
pairwise tallies follow directly from the outcome pattern.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import Alpha, Election, LinearOrder, OutcomeTable, outcome_table


class InfeasibleSpec(ValueError):
    """The degree-sequence construction could not realize the request."""


class NameClash(ValueError):
    pass


class DesiredOutcomes:
    """A complete win/tie/loss pattern over a candidate set."""

    __slots__ = ("candidates", "_index", "res")

    def __init__(self, candidates: Sequence, res_matrix=None):
        self.candidates = tuple(candidates)
        self._index = {c: i for i, c in enumerate(self.candidates)}
        if len(self._index) != len(self.candidates):
            raise NameClash("duplicate candidate id")
        n = len(self.candidates)
        if res_matrix is None:
            res_matrix = np.zeros((n, n), dtype=np.int8)
        self.res = res_matrix

    @classmethod
    def from_beats(cls, candidates: Sequence, beats: Iterable) -> "DesiredOutcomes":
        """All listed (winner, loser) contests decisive, everything else tied."""
        spec = cls(candidates)
        for w, l in beats:
            spec.set_beats(w, l)
        return spec

    @classmethod
    def from_table(cls, table: OutcomeTable) -> "DesiredOutcomes":
        return cls(table.candidates, table.result_matrix.copy())

    def set_beats(self, winner: str, loser: str):
        i, j = self._index[winner], self._index[loser]
        if i == j:
            raise ValueError(f"{winner!r} cannot beat itself")
        self.res[i, j] = 1
        self.res[j, i] = -1

    def set_tie(self, a: str, b: str):
        i, j = self._index[a], self._index[b]
        self.res[i, j] = 0
        self.res[j, i] = 0

    def result(self, a: str, b: str) -> int:
        return int(self.res[self._index[a], self._index[b]])


class McGarveyBallots:
    """Lazy ballot sequence of a McGarvey realization.

    Candidate restriction keeps the full pattern: restricted ballots from
    dropped contests still cancel pairwise, so every tally stays
    pair_count() + result, which is what the fast outcome-table path uses.
    """

    __slots__ = ("_full_candidates", "_full_res", "_kept", "_pair_count")

    def __init__(self, full_candidates, full_res, kept=None, pair_count=None):
        self._full_candidates = tuple(full_candidates)
        self._full_res = full_res
        self._kept = tuple(kept) if kept is not None else self._full_candidates
        if pair_count is None:
            pair_count = int(np.count_nonzero(np.triu(full_res, 1)))
        self._pair_count = pair_count

    def pair_count(self) -> int:
        return self._pair_count

    def total_multiplicity(self) -> int:
        return 2 * self._pair_count

    def margin_result(self):
        if self._kept == self._full_candidates:
            return self._full_res
        index = {c: i for i, c in enumerate(self._full_candidates)}
        idx = [index[c] for c in self._kept]
        return self._full_res[np.ix_(idx, idx)]

    def pair_tally(self, a: str, b: str) -> int:
        index = {c: i for i, c in enumerate(self._full_candidates)}
        return self._pair_count + int(self._full_res[index[a], index[b]])

    def restrict(self, keep: frozenset) -> "McGarveyBallots":
        kept = tuple(c for c in self._kept if c in keep)
        return McGarveyBallots(self._full_candidates, self._full_res, kept, self._pair_count)

    def __len__(self):
        return 2 * self._pair_count

    def __iter__(self):
        full = self._full_candidates
        kept = frozenset(self._kept)
        n = len(full)
        for i in range(n):
            for j in range(i + 1, n):
                r = int(self._full_res[i, j])
                if r == 0:
                    continue
                w, l = (full[i], full[j]) if r > 0 else (full[j], full[i])
                rest = [c for c in full if c != w and c != l]
                first = [w, l] + rest
                second = rest[::-1] + [w, l]
                yield LinearOrder(tuple(c for c in first if c in kept))
                yield LinearOrder(tuple(c for c in second if c in kept))

    def __eq__(self, other):
        if isinstance(other, McGarveyBallots):
            return (
                self._full_candidates == other._full_candidates
                and self._kept == other._kept
                and np.array_equal(self._full_res, other._full_res)
            )
        return list(self) == list(other)

    def __hash__(self):
        return hash((self._full_candidates, self._kept, self._full_res.tobytes()))


def realize_outcomes(spec: DesiredOutcomes) -> Election:
    """Election whose head-to-head results equal the requested pattern."""
    if not spec.candidates:
        raise ValueError("need at least one candidate")
    return Election(spec.candidates, McGarveyBallots(spec.candidates, spec.res), validate=False)


def build_pad(n: int, prefix: str = "pad") -> Election:
    """Circulant election on 2n+1 candidates, each with n wins and n losses."""
    if n < 0:
        raise ValueError("n must be >= 0")
    m = 2 * n + 1
    names = [f"{prefix}{i}" for i in range(m)]
    spec = DesiredOutcomes(names)
    for i in range(m):
        for d in range(1, n + 1):
            spec.set_beats(names[i], names[(i + d) % m])
    return realize_outcomes(spec)


def landau_feasible(degrees: Sequence[int]) -> bool:
    """Landau's condition for a tournament out-degree sequence."""
    seq = sorted(degrees)
    total = 0
    for j, d in enumerate(seq, start=1):
        if d < 0:
            return False
        total += d
        if total < j * (j - 1) // 2:
            return False
    return total == len(seq) * (len(seq) - 1) // 2


def tournament_from_out_degrees(degrees: Sequence[int]):
    """Tournament result matrix with the prescribed out-degree sequence.

    Classical induction step for Landau's theorem: the vertex with the
    smallest remaining target beats that many of the next-smallest rivals
    and loses to all larger ones, handing them wins they still need.
    Raises InfeasibleSpec when the sequence is not realizable.
    """
    m = len(degrees)
    if not landau_feasible(degrees):
        raise InfeasibleSpec(f"no tournament has out-degrees {list(degrees)}")
    res = np.zeros((m, m), dtype=np.int8)
    vals = np.array(degrees, dtype=np.int64)
    ids = np.arange(m, dtype=np.intp)
    for active in range(m, 1, -1):
        order = np.lexsort((ids[:active], -vals[:active]))
        vals[:active] = vals[order]
        ids[:active] = ids[order]
        last = active - 1
        need = int(vals[last])
        if need > last:
            raise InfeasibleSpec("degree sequence not realizable")
        v = ids[last]
        split = last - need
        if need:
            res[v, ids[split:last]] = 1
            res[ids[split:last], v] = -1
        if split:
            res[v, ids[:split]] = -1
            res[ids[:split], v] = 1
            vals[:split] -= 1
            if vals[split - 1] < 0:
                raise InfeasibleSpec("degree sequence not realizable")
    if vals[0] != 0:
        raise InfeasibleSpec("degree sequence not realizable")
    return res


@dataclass(frozen=True)
class ScoredSpec:
    """Base election plus per-candidate targets k_i, with 0 <= k_i <= n."""

    base: Election
    k: tuple

    def __post_init__(self):
        n = len(self.base.candidates)
        if len(self.k) != n:
            raise ValueError("k vector length must equal the candidate count")
        if any(not 0 <= v <= n for v in self.k):
            raise ValueError("each k_i must lie in [0, n]")


def build_scored(spec: ScoredSpec, alpha: Alpha, dummy_prefix: str = "d_") -> Election:
    """Add 2n^2 dummies so candidate i scores scaled t*(2n^2 - k_i) + s*t_i.

    Within-base results are preserved; all dummy contests are decisive; every
    dummy ends at most n^2 + 1 points.  Dummies beaten by many base
    candidates receive correspondingly higher among-dummy out-degrees.
    """
    base = spec.base
    n = len(base.candidates)
    ndum = 2 * n * n
    dummies = [f"{dummy_prefix}{i}" for i in range(1, ndum + 1)]
    if set(dummies) & set(base.candidates):
        raise NameClash("dummy ids collide with base candidates")

    base_table = outcome_table(base)
    base_res = base_table.result_matrix
    wins, ties = base_table.wins_and_ties()

    # Candidate i beats exactly 2n^2 - k_i - w_i dummies; spread the losses
    # round-robin so each dummy's win count against the base stays small.
    beats_count = [ndum - spec.k[i] - int(wins[i]) for i in range(n)]
    if any(b < 0 or b > ndum for b in beats_count):
        raise InfeasibleSpec("base wins exceed the dummy budget")
    dummy_wins_from_base = [0] * ndum
    loses_to = [set() for _ in range(n)]  # dummies that beat candidate i
    cursor = 0
    for i in range(n):
        for _ in range(ndum - beats_count[i]):
            loses_to[i].add(cursor)
            dummy_wins_from_base[cursor] += 1
            cursor = (cursor + 1) % ndum

    cap = [n * n + 1 - q for q in dummy_wins_from_base]
    surplus = sum(cap) - ndum * (ndum - 1) // 2
    if surplus < 0:
        raise InfeasibleSpec("dummy score caps cannot reach the degree total")
    targets = cap[:]
    while surplus > 0:
        for j in range(ndum):
            if surplus == 0:
                break
            if targets[j] > 0:
                targets[j] -= 1
                surplus -= 1
    dummy_res = tournament_from_out_degrees(targets)

    total = n + ndum
    res = np.zeros((total, total), dtype=np.int8)
    res[:n, :n] = base_res
    res[n:, n:] = dummy_res
    for i in range(n):
        for j in range(ndum):
            if j in loses_to[i]:
                res[n + j, i] = 1
                res[i, n + j] = -1
            else:
                res[i, n + j] = 1
                res[n + j, i] = -1

    out = realize_outcomes(DesiredOutcomes(tuple(base.candidates) + tuple(dummies), res))
    _check_scored(out, spec, alpha, ties)
    return out


def _check_scored(out: Election, spec: ScoredSpec, alpha: Alpha, base_ties):
    n = len(spec.base.candidates)
    t, s = alpha.den, alpha.num
    scores = outcome_table(out).scaled_scores(alpha)
    for i, c in enumerate(spec.base.candidates):
        want = t * (2 * n * n - spec.k[i]) + s * int(base_ties[i])
        if scores[c] != want:
            raise InfeasibleSpec(f"score of {c} is {scores[c]}, wanted {want}")
    bound = t * (n * n + 1)
    for c in out.candidates[n:]:
        if scores[c] > bound:
            raise InfeasibleSpec(f"dummy {c} scores {scores[c]} > {bound}")


def combine_ghr(front: Election, back: Election, r: str = "r") -> Election:
    """Join two elections through a fresh pivot candidate.

    Every front candidate beats the pivot, the pivot beats every back
    candidate, every back candidate beats every front candidate, and all
    within-block results are preserved.
    """
    fc, bc = front.candidates, back.candidates
    if set(fc) & set(bc) or r in fc or r in bc:
        raise NameClash("candidate sets must be disjoint and the pivot fresh")
    if len(bc) < 2:
        raise ValueError("the back election needs at least two candidates")
    names = (r,) + tuple(fc) + tuple(bc)
    spec = DesiredOutcomes(names)
    nf = len(fc)
    spec.res[1:nf + 1, 1:nf + 1] = outcome_table(front).result_matrix
    spec.res[nf + 1:, nf + 1:] = outcome_table(back).result_matrix
    for f in fc:
        spec.set_beats(f, r)
    for h in bc:
        spec.set_beats(r, h)
        for f in fc:
            spec.set_beats(h, f)
    return realize_outcomes(spec)
