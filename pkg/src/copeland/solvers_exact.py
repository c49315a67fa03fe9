"""Exhaustive, certificate-producing solvers for control and bribery.

These are the ground truth the fast solvers are checked against.  Searches
enumerate the complete action space in a deterministic order (increasing
action size, then lexicographic by candidate or ballot position) and return
the first witness found; every witness is re-verified through the plain
core evaluation path before being returned.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    Alpha,
    CandidatePartition,
    Election,
    LinearOrder,
    MakeUniqueWinner,
    MakeWinner,
    NONUNIQUE,
    NotIrrational,
    OutcomeTable,
    PrecludeUniqueWinner,
    PrecludeWinner,
    PreferenceTable,
    RunoffCandidatePartition,
    TE,
    TP,
    UNIQUE,
    UnknownCandidate,
    VoterPartition,
    evaluate_goal,
    evaluate_goal_on_winners,
    evaluate_two_stage,
    goal_for,
    outcome_table,
    winners_from_table,
)
from .reductions import (
    AddedCandidates,
    AddedVoters,
    BribedBallots,
    CandidatePartitionWitness,
    ControlInstance,
    DeletedCandidates,
    DeletedVoters,
    Flips,
    VoterPartitionWitness,
    Witness,
    split_problem,
)


class BudgetExceeded(RuntimeError):
    pass


class MalformedInstance(ValueError):
    pass


@dataclass(frozen=True)
class SizeLimits:
    max_candidates: int = 4096
    max_voters: int = 64
    max_subsets: int = 2_000_000

    def __post_init__(self):
        if min(self.max_candidates, self.max_voters, self.max_subsets) <= 0:
            raise ValueError("limits must be positive")


DEFAULT_LIMITS = SizeLimits()

WINNER_GOALS = (MakeWinner, MakeUniqueWinner, PrecludeWinner, PrecludeUniqueWinner)


def _lenient_goal(table, alpha, goal) -> bool:
    """Goal on a restricted table; score goals naming absent candidates fail."""
    try:
        return evaluate_goal(table, alpha, goal)
    except UnknownCandidate:
        return False


class TableEngine:
    """Bitmask scoring over a fixed outcome table.

    Masks are Python ints with bit i for candidate i; scoring a candidate
    against a present-set is two popcounts.
    """

    def __init__(self, table: OutcomeTable, alpha: Alpha):
        self.table = table
        self.candidates = table.candidates
        self.t = alpha.den
        self.s = alpha.num
        self.win = table.win_masks()
        self.tie = table.tie_masks()
        self.n = len(self.candidates)
        full = (1 << self.n) - 1
        # Strongest rivals first makes the early-exit winner scan cheap.
        self.by_strength = sorted(
            range(self.n), key=lambda i: (-self.score(i, full), i))

    def score(self, i: int, present: int) -> int:
        return (self.t * (self.win[i] & present).bit_count()
                + self.s * (self.tie[i] & present).bit_count())

    def members(self, present: int):
        while present:
            low = present & -present
            yield low.bit_length() - 1
            present ^= low

    def winners_mask(self, present: int) -> int:
        best = -1
        mask = 0
        for i in self.members(present):
            v = self.score(i, present)
            if v > best:
                best, mask = v, 1 << i
            elif v == best:
                mask |= 1 << i
        return mask

    def survivors_mask(self, present: int, rule: str) -> int:
        if not present:
            return 0
        win = self.winners_mask(present)
        if rule == TE and win.bit_count() != 1:
            return 0
        return win

    def goal_holds(self, present: int, goal, p_index: int) -> bool:
        if isinstance(goal, WINNER_GOALS):
            inside = bool(present >> p_index & 1)
            if isinstance(goal, (PrecludeWinner, PrecludeUniqueWinner)) and not inside:
                return True
            if isinstance(goal, (MakeWinner, MakeUniqueWinner)) and not inside:
                return False
            # Early-exit scan: p wins iff no rival scores above it (at or
            # above it, in the unique model).
            p_score = self.score(p_index, present)
            weak = isinstance(goal, (MakeUniqueWinner, PrecludeUniqueWinner))
            beaten = False
            for i in self.by_strength:
                if i == p_index or not present >> i & 1:
                    continue
                sc = self.score(i, present)
                if sc > p_score or (weak and sc == p_score):
                    beaten = True
                    break
            if isinstance(goal, (MakeWinner, MakeUniqueWinner)):
                return not beaten
            return beaten
        keep = [self.candidates[i] for i in self.members(present)]
        return _lenient_goal(self.table.restrict(keep), Alpha(self.s, self.t), goal)

    def winner_goal_on_mask(self, winners: int, goal, p_index: int) -> bool:
        has_p = bool(winners >> p_index & 1)
        if isinstance(goal, MakeWinner):
            return has_p
        if isinstance(goal, MakeUniqueWinner):
            return winners == 1 << p_index
        if isinstance(goal, PrecludeWinner):
            return not has_p
        if isinstance(goal, PrecludeUniqueWinner):
            return winners != 1 << p_index
        raise MalformedInstance("two-stage search needs a winner goal")


def _mask_of(indices) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


def _subset_counts(n_items: int, max_size: int) -> int:
    total = 0
    binom = 1
    for size in range(0, min(max_size, n_items) + 1):
        total += binom
        binom = binom * (n_items - size) // (size + 1)
    return total


def solve_control_exact(instance: ControlInstance, limits: SizeLimits = DEFAULT_LIMITS) -> Optional[Witness]:
    """Exhaustive decision for any control problem; YES answers carry a witness."""
    kind = instance.kind()
    if kind in ("AC_u", "AC", "DC"):
        return _solve_selection(instance, limits)
    if kind in ("PC-TP", "PC-TE", "RPC-TP", "RPC-TE"):
        return _solve_candidate_partition(instance, limits)
    if kind in ("AV", "DV"):
        return _solve_voter_selection(instance, limits)
    if kind in ("PV-TP", "PV-TE"):
        return _solve_voter_partition(instance, limits)
    raise MalformedInstance(f"unsupported problem {instance.problem!r}")


def _check_candidate_budget(instance, limits):
    if len(instance.election.candidates) > limits.max_candidates:
        raise BudgetExceeded("too many candidates")


def _verify(instance, witness):
    if witness is not None and not apply_witness(instance, witness):
        raise AssertionError(f"witness failed to re-verify: {witness!r}")
    return witness


def _solve_selection(instance, limits):
    _check_candidate_budget(instance, limits)
    kind = instance.kind()
    table = outcome_table(instance.election)
    engine = TableEngine(table, instance.alpha)
    goal = instance.effective_goal()
    p_index = table.index(instance.distinguished)
    idx = {c: i for i, c in enumerate(table.candidates)}

    if kind in ("AC_u", "AC"):
        base = _mask_of(idx[c] for c in instance.registered)
        pool = [idx[c] for c in instance.spoilers]
        max_size = len(pool) if kind == "AC_u" else min(instance.k, len(pool))
        if _subset_counts(len(pool), max_size) > limits.max_subsets:
            raise BudgetExceeded("too many candidate subsets")
        for size in range(0, max_size + 1):
            for combo in itertools.combinations(pool, size):
                present = base | _mask_of(combo)
                if engine.goal_holds(present, goal, p_index):
                    added = frozenset(table.candidates[i] for i in combo)
                    return _verify(instance, AddedCandidates(added))
        return None

    # DC: the distinguished candidate is never deletable.
    full = _mask_of(range(engine.n))
    deletable = [i for i in range(engine.n) if i != p_index]
    max_size = min(instance.k, len(deletable))
    if _subset_counts(len(deletable), max_size) > limits.max_subsets:
        raise BudgetExceeded("too many deletion subsets")
    for size in range(0, max_size + 1):
        for combo in itertools.combinations(deletable, size):
            present = full & ~_mask_of(combo)
            if engine.goal_holds(present, goal, p_index):
                deleted = frozenset(table.candidates[i] for i in combo)
                return _verify(instance, DeletedCandidates(deleted))
    return None


def _solve_candidate_partition(instance, limits):
    _check_candidate_budget(instance, limits)
    kind = instance.kind()
    runoff = kind.startswith("RPC")
    rule = TP if kind.endswith("TP") else TE
    table = outcome_table(instance.election)
    engine = TableEngine(table, instance.alpha)
    goal = instance.effective_goal()
    p_index = table.index(instance.distinguished)
    n = engine.n

    free = n - 1 if runoff else n
    if 1 << free > limits.max_subsets:
        raise BudgetExceeded("too many bipartitions")

    if isinstance(goal, WINNER_GOALS) and n >= 14:
        found = _batched_partition_search(table, instance.alpha, rule, runoff, goal, p_index)
        if found is None:
            return None
        first, second = found
        return _verify(instance, CandidatePartitionWitness(first, second))

    others = [i for i in range(n) if i != p_index]
    full = _mask_of(range(n))
    for bits in range(1 << free):
        if runoff:
            c1 = 1 << p_index
            for j, i in enumerate(others):
                if bits >> j & 1:
                    c1 |= 1 << i
        else:
            c1 = bits
        c2 = full & ~c1
        surv1 = engine.survivors_mask(c1, rule)
        final = surv1 | (engine.survivors_mask(c2, rule) if runoff else c2)
        winners = engine.winners_mask(final) if final else 0
        ok = (engine.winner_goal_on_mask(winners, goal, p_index)
              if isinstance(goal, WINNER_GOALS)
              else _partition_table_goal(engine, final, goal))
        if ok:
            first = tuple(table.candidates[i] for i in engine.members(c1))
            second = tuple(table.candidates[i] for i in engine.members(c2))
            return _verify(instance, CandidatePartitionWitness(first, second))
    return None


def _partition_table_goal(engine, final_mask, goal):
    keep = [engine.candidates[i] for i in engine.members(final_mask)]
    return _lenient_goal(engine.table.restrict(keep), Alpha(engine.s, engine.t), goal)


def _batched_partition_search(table, alpha, rule, runoff, goal, p_index, block_bits=15):
    """Vectorized scan over bipartitions for the four winner goals.

    Scores are small integers, so float32 matmuls are exact.  Returns the
    witness partition as a pair of candidate tuples, or None.
    """
    n = len(table.candidates)
    res = table.result_matrix
    w_m = (res > 0).astype(np.float32)
    t_m = ((res == 0) & ~np.eye(n, dtype=bool)).astype(np.float32)
    t, s = float(alpha.den), float(alpha.num)
    score_m = (t * w_m + s * t_m).T.copy()  # presence @ score_m = scaled scores
    totals = score_m.sum(axis=0)

    free_positions = [i for i in range(n) if i != p_index] if runoff else list(range(n))
    free = len(free_positions)
    pos = np.array(free_positions, dtype=np.intp)
    low_bits = min(free, block_bits)
    per_block = 1 << low_bits
    nblocks = 1 << (free - low_bits)
    shifts = np.arange(low_bits, dtype=np.uint64)
    codes = np.arange(per_block, dtype=np.uint64)
    low = ((codes[:, None] >> shifts[None, :]) & np.uint64(1)).astype(np.float32)

    for blk in range(nblocks):
        p1 = np.zeros((per_block, n), dtype=np.float32)
        p1[:, pos[:low_bits]] = low
        for j in range(low_bits, free):
            if (blk >> (j - low_bits)) & 1:
                p1[:, pos[j]] = 1.0
        if runoff:
            p1[:, p_index] = 1.0

        in1 = p1 @ score_m
        sc1 = np.where(p1 > 0, in1, -1.0)
        best1 = sc1.max(axis=1)
        winners1 = (sc1 == best1[:, None]) & (p1 > 0)
        if rule == TE:
            winners1 &= (winners1.sum(axis=1) == 1)[:, None]

        p2 = p1 == 0
        if runoff:
            sc2 = np.where(p2, totals[None, :] - in1, -1.0)
            best2 = sc2.max(axis=1)
            winners2 = (sc2 == best2[:, None]) & p2
            if rule == TE:
                winners2 &= (winners2.sum(axis=1) == 1)[:, None]
            final = winners1 | winners2
        else:
            final = winners1 | p2

        want_p = isinstance(goal, (MakeWinner, MakeUniqueWinner))
        rows = np.flatnonzero(final[:, p_index]) if want_p else np.arange(per_block)
        if not rows.size:
            continue
        fin = final[rows].astype(np.float32)
        scf = np.where(fin > 0, fin @ score_m, -1.0)
        bestf = scf.max(axis=1)
        p_top = (fin[:, p_index] > 0) & (scf[:, p_index] == bestf) & (bestf >= 0)
        if isinstance(goal, MakeWinner):
            hit = p_top
        elif isinstance(goal, MakeUniqueWinner):
            hit = p_top & ((scf == bestf[:, None]).sum(axis=1) == 1)
        elif isinstance(goal, PrecludeWinner):
            hit = ~p_top
        else:  # PrecludeUniqueWinner
            hit = ~(p_top & ((scf == bestf[:, None]).sum(axis=1) == 1))
        where = np.flatnonzero(hit)
        if where.size:
            mask1 = p1[int(rows[int(where[0])])] > 0
            first = tuple(c for i, c in enumerate(table.candidates) if mask1[i])
            second = tuple(c for i, c in enumerate(table.candidates) if not mask1[i])
            return first, second
    return None


# --- Voter control -----------------------------------------------------------


def _ballot_types(ballots):
    """Group ballots by canonical form; returns (type ballot, count) pairs."""
    acc = {}
    order = []
    for b in ballots:
        key = b.canonical_key()
        if key not in acc:
            acc[key] = [b.with_multiplicity(1), 0]
            order.append(key)
        acc[key][1] += b.multiplicity
    return [tuple(acc[k]) for k in order]


def _pair_matrix(ballot, index):
    n = len(index)
    m = [[0] * n for _ in range(n)]
    if isinstance(ballot, LinearOrder):
        seq = [index[c] for c in ballot.order]
        for i in range(n):
            for j in range(i + 1, n):
                m[seq[i]][seq[j]] = 1
    else:
        for a, b in ballot.prefs:
            m[index[a]][index[b]] = 1
    return m


class _VoterEngine:
    """Incremental tallies for small candidate sets and grouped ballots."""

    def __init__(self, candidates, alpha):
        self.candidates = tuple(candidates)
        self.index = {c: i for i, c in enumerate(candidates)}
        self.n = len(candidates)
        self.t, self.s = alpha.den, alpha.num
        self.alpha = alpha

    def table_from(self, contribs) -> OutcomeTable:
        """contribs: iterable of (pair_matrix, count)."""
        n = self.n
        tally = [[0] * n for _ in range(n)]
        total = 0
        for mat, cnt in contribs:
            if not cnt:
                continue
            total += cnt
            for i in range(n):
                row = mat[i]
                trow = tally[i]
                for j in range(n):
                    if row[j]:
                        trow[j] += cnt
        res = np.zeros((n, n), dtype=np.int8)
        for i in range(n):
            for j in range(n):
                if i != j:
                    d = 2 * tally[i][j] - total
                    res[i, j] = 1 if d > 0 else (-1 if d < 0 else 0)
        return OutcomeTable(self.candidates, res, total, tally=tally)


def _count_vectors(counts, cap):
    """All vectors 0 <= x_i <= counts[i] with sum(x) <= cap, sizes ascending."""
    out = [[]]
    for c in counts:
        out = [v + [x] for v in out for x in range(0, min(c, cap) + 1)]
    vecs = [v for v in out if sum(v) <= cap]
    vecs.sort(key=lambda v: (sum(v), v))
    return vecs


def _solve_voter_selection(instance, limits):
    adding = instance.kind() == "AV"
    goal = instance.effective_goal()
    alpha = instance.alpha
    election = instance.election
    engine = _VoterEngine(election.candidates, alpha)
    p_index = engine.index[instance.distinguished]

    base_types = _ballot_types(election.ballots)
    pool_types = _ballot_types(instance.pool) if adding else base_types
    total_units = sum(c for _, c in base_types) + (sum(c for _, c in pool_types) if adding else 0)
    if total_units > limits.max_voters:
        raise BudgetExceeded("too many voters")

    mats = [(_pair_matrix(b, engine.index), b, c) for b, c in pool_types]
    base = [(_pair_matrix(b, engine.index), c) for b, c in base_types]
    vectors = _count_vectors([c for _, _, c in mats], instance.k)
    if len(vectors) > limits.max_subsets:
        raise BudgetExceeded("too many voter sub-multisets")

    for vec in vectors:
        if adding:
            contribs = base + [(mat, x) for (mat, _, _), x in zip(mats, vec)]
        else:
            contribs = [(mat, cnt - x) for (mat, _, cnt), x in zip(mats, vec)]
        table = engine.table_from(contribs)
        if evaluate_goal(table, alpha, goal):
            chosen = tuple(
                b.with_multiplicity(x)
                for (_, b, _), x in zip(mats, vec) if x
            )
            witness = AddedVoters(chosen) if adding else DeletedVoters(chosen)
            return _verify(instance, witness)
    return None


def _solve_voter_partition(instance, limits):
    rule = TP if instance.kind().endswith("TP") else TE
    goal = instance.effective_goal()
    alpha = instance.alpha
    election = instance.election
    engine = _VoterEngine(election.candidates, alpha)

    types = _ballot_types(election.ballots)
    if sum(c for _, c in types) > limits.max_voters:
        raise BudgetExceeded("too many voters")
    mats = [(_pair_matrix(b, engine.index), b, c) for b, c in types]
    full_table = outcome_table(election)

    combos = 1
    for _, _, c in mats:
        combos *= c + 1
    if combos > limits.max_subsets:
        raise BudgetExceeded("too many voter bipartitions")

    for vec in itertools.product(*[range(c + 1) for _, _, c in mats]):
        t1 = engine.table_from((mat, x) for (mat, _, _), x in zip(mats, vec))
        t2 = engine.table_from((mat, c - x) for (mat, _, c), x in zip(mats, vec))
        surv = frozenset()
        for side_table in (t1, t2):
            win = winners_from_table(side_table, alpha, NONUNIQUE)
            if rule == TE and len(win) != 1:
                win = frozenset()
            surv |= win
        if surv:
            final = full_table.restrict([c for c in election.candidates if c in surv])
            ok = _lenient_goal(final, alpha, goal)
        else:
            ok = evaluate_goal_on_winners(frozenset(), goal) if isinstance(goal, WINNER_GOALS) else False
        if ok:
            first = tuple(b.with_multiplicity(x) for (_, b, _), x in zip(mats, vec) if x)
            second = tuple(
                b.with_multiplicity(c - x) for (_, b, c), x in zip(mats, vec) if c - x
            )
            return _verify(instance, VoterPartitionWitness(first, second))
    return None


# --- Bribery -----------------------------------------------------------------


def _all_ballots_of_kind(candidates, kind):
    if kind == "order":
        for perm in itertools.permutations(candidates):
            yield LinearOrder(perm)
    else:
        pairs = [(a, b) for i, a in enumerate(candidates) for b in candidates[i + 1:]]
        for choice in itertools.product((0, 1), repeat=len(pairs)):
            yield PreferenceTable.from_pairs(
                (pair if bit else pair[::-1]) for pair, bit in zip(pairs, choice)
            )


def solve_bribery_exact(election: Election, alpha: Alpha, p: str, k: int,
                        direction: str, model: str, limits: SizeLimits = DEFAULT_LIMITS,
                        goal=None) -> Optional[Witness]:
    """Exhaustive bribery: replace at most k unit ballots, keeping each
    bribed ballot's kind (orders stay orders, tables stay tables)."""
    if goal is None:
        goal = goal_for(direction, model, p)
    units = election.unit_expand().ballots
    if len(units) > limits.max_voters:
        raise BudgetExceeded("too many voters")
    engine = _VoterEngine(election.candidates, alpha)

    types = _ballot_types(units)
    mats = [(_pair_matrix(b, engine.index), b, c) for b, c in types]
    repl_mats = {}
    for kind in ("order", "table"):
        if any(_kind_of(b) == kind for _, b, _ in mats):
            repl_mats[kind] = [
                (b, _pair_matrix(b, engine.index))
                for b in _all_ballots_of_kind(election.candidates, kind)
            ]

    count = 0
    for vec in _count_vectors([c for _, _, c in mats], k):
        kept = [(mat, c - x) for (mat, _, c), x in zip(mats, vec)]
        n_by_kind = {
            kind: sum(x for (_, b, _), x in zip(mats, vec) if _kind_of(b) == kind)
            for kind in repl_mats
        }
        spaces = [
            itertools.combinations_with_replacement(repl_mats[kind], n_by_kind[kind])
            for kind in sorted(repl_mats)
        ]
        for choice in itertools.product(*spaces):
            count += 1
            if count > limits.max_subsets:
                raise BudgetExceeded("bribery search too large")
            by_kind = dict(zip(sorted(repl_mats), choice))
            contribs = list(kept)
            for group in by_kind.values():
                contribs.extend((mat, 1) for _, mat in group)
            table = engine.table_from(contribs)
            if evaluate_goal(table, alpha, goal):
                witness = _bribery_witness(units, mats, vec, by_kind)
                if not apply_ballot_witness(election, alpha, goal, witness):
                    raise AssertionError("bribery witness failed to re-verify")
                return witness
    return None


def _kind_of(ballot) -> str:
    return "order" if isinstance(ballot, LinearOrder) else "table"


def _bribery_witness(units, mats, vec, by_kind):
    """Concrete (unit index, replacement) pairs; replacements match kinds."""
    queues = {kind: [b for b, _ in group] for kind, group in by_kind.items()}
    pairs = []
    for (_, b, _), x in zip(mats, vec):
        if not x:
            continue
        key = b.canonical_key()
        indices = [i for i, u in enumerate(units) if u.canonical_key() == key]
        for i in indices[:x]:
            pairs.append((i, queues[_kind_of(b)].pop(0)))
    return BribedBallots(tuple(pairs))


def solve_microbribery_exact(election: Election, alpha: Alpha, p: str, k: int,
                             direction: str, model: str,
                             limits: SizeLimits = DEFAULT_LIMITS,
                             goal=None) -> Optional[Witness]:
    """Exhaustive microbribery: at most k single preference-table entry flips."""
    if not election.all_tables():
        raise NotIrrational("microbribery needs preference-table ballots")
    if goal is None:
        goal = goal_for(direction, model, p)
    units = list(election.unit_expand().ballots)
    if len(units) > limits.max_voters:
        raise BudgetExceeded("too many voters")
    cands = election.candidates
    pairs = [(a, b) for i, a in enumerate(cands) for b in cands[i + 1:]]
    entries = [(i, pair) for i in range(len(units)) for pair in pairs]

    count = 0
    for size in range(0, k + 1):
        for flips in itertools.combinations_with_replacement(entries, size):
            count += 1
            if count > limits.max_subsets:
                raise BudgetExceeded("microbribery search too large")
            flipped = list(units)
            for i, pair in flips:
                flipped[i] = flipped[i].flip(*pair)
            table = outcome_table(Election(cands, tuple(flipped), validate=False))
            if evaluate_goal(table, alpha, goal):
                witness = Flips(tuple(flips))
                if not apply_ballot_witness(election, alpha, goal, witness):
                    raise AssertionError("flip witness failed to re-verify")
                return witness
    return None


# --- Witness re-verification --------------------------------------------------


def apply_witness(instance: ControlInstance, witness: Witness) -> bool:
    """Apply a witness through the plain core path and test the goal."""
    goal = instance.effective_goal()
    alpha = instance.alpha
    kind = instance.kind()
    election = instance.election

    if isinstance(witness, AddedCandidates):
        keep = [c for c in election.candidates
                if c in frozenset(instance.registered) | witness.candidates]
        return evaluate_goal(outcome_table(election).restrict(keep), alpha, goal)
    if isinstance(witness, DeletedCandidates):
        if instance.distinguished in witness.candidates:
            return False
        keep = [c for c in election.candidates if c not in witness.candidates]
        return evaluate_goal(outcome_table(election).restrict(keep), alpha, goal)
    if isinstance(witness, CandidatePartitionWitness):
        runoff = kind.startswith("RPC")
        rule = TP if kind.endswith("TP") else TE
        split = (RunoffCandidatePartition(witness.first, witness.second) if runoff
                 else CandidatePartition(witness.first, witness.second))
        win = evaluate_two_stage(election, split, rule, alpha, NONUNIQUE)
        return _two_stage_goal(election, win, alpha, goal)
    if isinstance(witness, AddedVoters):
        new = Election(election.candidates, tuple(election.ballots) + tuple(witness.ballots))
        return evaluate_goal(outcome_table(new), alpha, goal)
    if isinstance(witness, DeletedVoters):
        remaining = _remove_ballots(election.ballots, witness.ballots)
        new = Election(election.candidates, remaining, validate=False)
        return evaluate_goal(outcome_table(new), alpha, goal)
    if isinstance(witness, VoterPartitionWitness):
        rule = TP if kind.endswith("TP") else TE
        split = VoterPartition(witness.first, witness.second)
        win = evaluate_two_stage(election, split, rule, alpha, NONUNIQUE)
        return _two_stage_goal(election, win, alpha, goal)
    if isinstance(witness, (BribedBallots, Flips)):
        return apply_ballot_witness(election, alpha, goal, witness)
    raise MalformedInstance(f"cannot re-verify witness {witness!r}")


def apply_ballot_witness(election: Election, alpha: Alpha, goal, witness) -> bool:
    """Re-verify a bribery or microbribery witness on unit-expanded ballots."""
    units = list(election.unit_expand().ballots)
    if isinstance(witness, BribedBallots):
        for i, replacement in witness.replacements:
            if _kind_of(units[i]) != _kind_of(replacement):
                return False
            units[i] = replacement
    elif isinstance(witness, Flips):
        for i, pair in witness.flips:
            units[i] = units[i].flip(*pair)
    else:
        raise MalformedInstance(f"not a ballot witness: {witness!r}")
    new = Election(election.candidates, tuple(units))
    return evaluate_goal(outcome_table(new), alpha, goal)


def _two_stage_goal(election, win, alpha, goal) -> bool:
    # The nonunique final winner set carries the model interpretation via
    # the goal itself (MakeUniqueWinner asks for a singleton, and so on).
    if isinstance(goal, WINNER_GOALS):
        return evaluate_goal_on_winners(win, goal)
    if not win:
        return False
    final = outcome_table(election).restrict([c for c in election.candidates if c in win])
    return _lenient_goal(final, alpha, goal)


def _remove_ballots(ballots, removed):
    pool = {}
    for b in removed:
        pool[b.canonical_key()] = pool.get(b.canonical_key(), 0) + b.multiplicity
    out = []
    for b in ballots:
        key = b.canonical_key()
        take = min(pool.get(key, 0), b.multiplicity)
        if take:
            pool[key] -= take
        if b.multiplicity - take > 0:
            out.append(b.with_multiplicity(b.multiplicity - take))
    if any(v > 0 for v in pool.values()):
        raise MalformedInstance("deleted ballots not present in the election")
    return tuple(out)
