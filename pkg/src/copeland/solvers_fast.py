"""Polynomial algorithms for the vulnerable cases and FPT bounded-case solvers.

The destructive candidate solvers rest on the per-opponent score
decomposition: a candidate's score is the sum of its scores in the
two-candidate subelections, so adding or deleting a candidate shifts each
rival's lead over the distinguished candidate by an independent additive
delta, and per-rival greedy selection is optimal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (
    Alpha,
    Election,
    MakeUniqueWinner,
    MakeWinner,
    NONUNIQUE,
    NotIrrational,
    OutcomeTable,
    PrecludeUniqueWinner,
    PrecludeWinner,
    TE,
    TP,
    UNIQUE,
    evaluate_goal,
    evaluate_goal_on_winners,
    goal_for,
    outcome_table,
    winners_from_table,
)
from .reductions import (
    AddedCandidates,
    AddedVoters,
    CandidatePartitionWitness,
    ControlInstance,
    DeletedCandidates,
    DeletedVoters,
    Flips,
    VoterPartitionWitness,
    Witness,
)
from .solvers_exact import (
    WINNER_GOALS,
    TableEngine,
    _ballot_types,
    _lenient_goal,
    _pair_matrix,
    _VoterEngine,
    apply_ballot_witness,
    apply_witness,
)


class WrongProblem(ValueError):
    pass


class BoundViolated(ValueError):
    pass


@dataclass(frozen=True)
class BoundParameter:
    """BC_j bounds total candidates, BV_j total voter multiplicity."""

    kind: str
    j: int

    def __post_init__(self):
        if self.kind not in ("BC", "BV"):
            raise ValueError(f"bad bound kind {self.kind!r}")
        if self.j < 1:
            raise ValueError("bound must be positive")


def _points_matrix(table: OutcomeTable, alpha: Alpha):
    """pts[i][j] = scaled points candidate i earns in the contest with j."""
    res = table.result_matrix
    t, s = alpha.den, alpha.num
    pts = np.where(res > 0, t, 0) + np.where(res == 0, s, 0)
    np.fill_diagonal(pts, 0)
    return pts.astype(np.int64)


def greedy_destructive_candidate(instance: ControlInstance) -> Optional[Witness]:
    """Destructive adding/deleting of candidates, per-rival greedy deltas."""
    kind = instance.kind()
    if instance.direction() != "DC" or kind not in ("AC_u", "AC", "DC"):
        raise WrongProblem(f"greedy solver does not handle {instance.problem}")
    table = outcome_table(instance.election)
    pts = _points_matrix(table, instance.alpha)
    idx = {c: i for i, c in enumerate(table.candidates)}
    p = idx[instance.distinguished]
    strict = instance.model == NONUNIQUE  # rival must strictly outscore p

    if kind == "DC":
        present = [idx[c] for c in instance.election.candidates]
        deletable = [i for i in present if i != p]
        budget = instance.k
        for c in deletable:
            gap = int(pts[c, present].sum() - pts[p, present].sum())
            deltas = sorted(
                ((int(pts[p, d] - pts[c, d]), d) for d in deletable if d != c),
                key=lambda x: (-x[0], x[1]),
            )
            chosen = [d for delta, d in deltas[:budget] if delta > 0]
            gap += sum(int(pts[p, d] - pts[c, d]) for d in chosen)
            if gap > 0 or (not strict and gap >= 0):
                witness = DeletedCandidates(
                    frozenset(table.candidates[d] for d in chosen))
                assert apply_witness(instance, witness)
                return witness
        return None

    registered = [idx[c] for c in instance.registered]
    spoilers = [idx[c] for c in instance.spoilers]
    budget = len(spoilers) if kind == "AC_u" else instance.k
    rivals = [i for i in registered if i != p] + spoilers
    for c in rivals:
        mandatory = [c] if c in spoilers else []
        room = budget - len(mandatory)
        if room < 0:
            continue
        base = registered + mandatory
        gap = int(pts[c, base].sum() - pts[p, base].sum())
        deltas = sorted(
            ((int(pts[c, d] - pts[p, d]), d) for d in spoilers if d != c),
            key=lambda x: (-x[0], x[1]),
        )
        chosen = [d for delta, d in deltas[:room] if delta > 0]
        gap += sum(int(pts[c, d] - pts[p, d]) for d in chosen)
        if gap > 0 or (not strict and gap >= 0):
            witness = AddedCandidates(
                frozenset(table.candidates[d] for d in mandatory + chosen))
            assert apply_witness(instance, witness)
            return witness
    return None


def destructive_partition_candidate(instance: ControlInstance) -> Optional[Witness]:
    """Destructive partition of candidates (PC and RPC, TP and TE).

    Reduces to unlimited deletion: the distinguished candidate loses iff it
    can be beaten (or, where ties see it eliminated or merely matched,
    tied) inside some subset containing it; the partition then isolates
    that subset.  The ties-promote unique-winner case adds direct probes of
    candidate partitions derived from the greedy tie sets.
    """
    kind = instance.kind()
    if instance.direction() != "DC" or kind not in ("PC-TP", "PC-TE", "RPC-TP", "RPC-TE"):
        raise WrongProblem(f"partition solver does not handle {instance.problem}")
    runoff = kind.startswith("RPC")
    rule = TP if kind.endswith("TP") else TE
    election = instance.election
    table = outcome_table(election)
    pts = _points_matrix(table, instance.alpha)
    n = len(table.candidates)
    idx = {c: i for i, c in enumerate(table.candidates)}
    p = idx[instance.distinguished]
    names = table.candidates

    def partition_witness(first_idx):
        first = tuple(names[i] for i in sorted(first_idx))
        rest = tuple(c for c in names if c not in set(first))
        return CandidatePartitionWitness(first, rest)

    best = {}
    for c in range(n):
        if c == p:
            continue
        gap = int(pts[c, p] - pts[p, c])
        members = [p, c]
        for d in range(n):
            if d in (p, c):
                continue
            delta = int(pts[c, d] - pts[p, d])
            if delta > 0:
                gap += delta
                members.append(d)
        best[c] = (gap, members)

    # Case A: p fails (or, under TE, ties) inside its own part.
    threshold_tie_ok = rule == TE  # a top tie eliminates p entirely
    for c, (gap, members) in sorted(best.items()):
        if gap > 0 or (threshold_tie_ok and gap == 0):
            witness = partition_witness(members)
            if apply_witness(instance, witness):
                return witness

    if rule == TE or instance.model == NONUNIQUE:
        # Proven complete: TE needs max gap >= 0, TP-nonunique needs > 0.
        return None

    # TP, unique model: p always reaches the final; it suffices to recreate
    # a top tie there.  Probe partitions built from each rival's tie set.
    probes = []
    full = list(range(n))
    probes.append(full)  # the identity partition (C, empty)
    if not runoff:
        probes.append([])  # everything unfiltered in the second part
    for c, (gap, members) in sorted(best.items()):
        if gap != 0:
            continue
        zero = [d for d in range(n)
                if d not in (p, c) and int(pts[c, d] - pts[p, d]) == 0]
        probes.append(members)
        probes.append(sorted(members + zero))
    for c in range(n):
        if c != p:
            probes.append([d for d in range(n) if d != c])
    seen = set()
    for first_idx in probes:
        key = frozenset(first_idx)
        if key in seen:
            continue
        seen.add(key)
        witness = partition_witness(first_idx)
        if apply_witness(instance, witness):
            return witness
        if not runoff:
            flipped = CandidatePartitionWitness(witness.second, witness.first)
            if apply_witness(instance, flipped):
                return flipped
    return None


def destructive_microbribery_dp(election: Election, alpha: Alpha, p: str, k: int,
                                model: str = NONUNIQUE, goal=None) -> Optional[Witness]:
    """Destructive microbribery in polynomial time via a per-rival knapsack.

    Only contests involving the distinguished candidate or the chosen rival
    move their score gap; each such contest offers at most two alternative
    outcomes with exact flip costs, and a min-cost table over scaled-integer
    gains decides whether the gap can be closed within k flips.
    """
    if not election.all_tables():
        raise NotIrrational("microbribery needs preference-table ballots")
    if goal is None:
        goal = goal_for("DC", model, p)
    table = outcome_table(election)
    units = list(election.unit_expand().ballots)
    total = len(units)
    t, s = alpha.den, alpha.num
    pts = _points_matrix(table, alpha)
    names = table.candidates
    pi = names.index(p)
    strict = model == NONUNIQUE

    def outcome_costs(a, b):
        """(kind, points-of-a, points-of-b, cost) per reachable outcome.

        Outcome kinds are explicit: at alpha 0 a tie and a loss both pay 0
        points, and at alpha 1 a tie pays like a win, so point values alone
        cannot name the outcome.
        """
        na = table.tally(names[a], names[b])
        nb = total - na
        need_win = total // 2 + 1
        opts = [("win", t, 0, max(0, need_win - na))]
        if total % 2 == 0:
            opts.append(("tie", s, s, abs(total // 2 - na)))
        opts.append(("loss", 0, t, max(0, need_win - nb)))
        return opts

    for c in range(len(names)):
        if c == pi:
            continue
        others = [d for d in range(len(names)) if d not in (pi, c)]
        gap = int(pts[c, pi] - pts[pi, c])
        gap += int(pts[c, others].sum() - pts[pi, others].sum())
        needed = (1 if strict else 0) - gap
        if needed <= 0:
            witness = Flips(())
            assert apply_ballot_witness(election, alpha, goal, witness)
            return witness

        # One item per contest touching p or c; each option is a reachable
        # outcome with its gap gain (scaled units) and exact flip cost.
        # Options that lose gain are dominated by keeping the contest as is.
        items = []
        for d in others:
            cur = int(pts[c, d])
            items.append([
                ((c, d, kind), pa - cur, cost)
                for kind, pa, _, cost in outcome_costs(c, d) if pa - cur > 0
            ])
            cur = int(pts[pi, d])
            items.append([
                ((pi, d, kind), cur - pa, cost)
                for kind, pa, _, cost in outcome_costs(pi, d) if cur - pa > 0
            ])
        cur_pc = int(pts[c, pi] - pts[pi, c])
        items.append([
            ((c, pi, kind), (pa - pb) - cur_pc, cost)
            for kind, pa, pb, cost in outcome_costs(c, pi)
            if (pa - pb) - cur_pc > 0
        ])

        cap = needed
        INF = float("inf")
        dp = [0] + [INF] * cap
        parents = []
        for opts in items:
            ndp = list(dp)
            parent = [None] * (cap + 1)
            for g in range(cap + 1):
                if dp[g] == INF:
                    continue
                for tag, gain, cost in opts:
                    ng = min(cap, g + gain)
                    if dp[g] + cost < ndp[ng]:
                        ndp[ng] = dp[g] + cost
                        parent[ng] = (g, tag)
            dp = ndp
            parents.append(parent)
        if dp[cap] <= k:
            plan = []
            g = cap
            for it in range(len(items) - 1, -1, -1):
                entry = parents[it][g]
                if entry is not None:
                    g, tag = entry
                    plan.append(tag)
            flips = _realize_flips(plan, units, names, table, total)
            witness = Flips(tuple(flips))
            assert apply_ballot_witness(election, alpha, goal, witness)
            return witness
    return None


def _realize_flips(plan, units, names, table, total):
    """Turn chosen outcome changes into concrete per-ballot entry flips."""
    flips = []
    for a, b, kind in plan:
        na = table.tally(names[a], names[b])
        need_win = total // 2 + 1
        if kind == "win":
            raise_by, direction = max(0, need_win - na), "to_a"
        elif kind == "tie":
            diff = total // 2 - na
            raise_by, direction = abs(diff), ("to_a" if diff > 0 else "to_b")
        else:
            raise_by, direction = max(0, need_win - (total - na)), "to_b"
        if not raise_by:
            continue
        aname, bname = names[a], names[b]
        want_source = (bname, aname) if direction == "to_a" else (aname, bname)
        done = 0
        for i, unit in enumerate(units):
            if done == raise_by:
                break
            if want_source in unit.prefs:
                flips.append((i, (aname, bname)))
                done += 1
        if done != raise_by:
            raise AssertionError("not enough flippable entries")
    return flips


# --- FPT bounded-case solvers -------------------------------------------------


def fpt_candidate_control(instance: ControlInstance, bound: BoundParameter,
                          goal=None) -> Optional[Witness]:
    """Bounded-candidates solver for every candidate-control problem.

    With at most j candidates the full table is computed once from the
    (possibly succinct) grouped ballots, and the action space is at most
    2^j subsets or bipartitions; any goal specification is accepted.
    """
    from dataclasses import replace

    from .solvers_exact import SizeLimits, solve_control_exact

    if bound.kind != "BC":
        raise BoundViolated("candidate control is bounded by candidate count")
    if instance.kind() not in ("AC_u", "AC", "DC", "PC-TP", "PC-TE", "RPC-TP", "RPC-TE"):
        raise WrongProblem(f"not a candidate-control problem: {instance.problem}")
    if len(instance.election.candidates) > bound.j:
        raise BoundViolated(f"instance has more than {bound.j} candidates")
    if goal is not None:
        instance = replace(instance, goal=goal)
    limits = SizeLimits(
        max_candidates=bound.j,
        max_voters=SizeLimits().max_voters,
        max_subsets=max(4 ** bound.j, 16),
    )
    return solve_control_exact(instance, limits)


def fpt_voter_control(instance: ControlInstance, bound: BoundParameter,
                      goal=None) -> Optional[Witness]:
    """Bounded-case solver for voter control, succinct multiplicities allowed.

    BV_j unit-expands (at most j voters overall) and enumerates directly.
    BC_j enumerates target outcome patterns (at most 3 per pair) and decides
    each by integer feasibility over per-type action counts.
    """
    from dataclasses import replace

    from .solvers_exact import SizeLimits, solve_control_exact

    if instance.kind() not in ("AV", "DV", "PV-TP", "PV-TE"):
        raise WrongProblem(f"not a voter-control problem: {instance.problem}")
    if goal is not None:
        instance = replace(instance, goal=goal)

    if bound.kind == "BV":
        total = instance.election.total_multiplicity()
        total += sum(b.multiplicity for b in instance.pool)
        if total > bound.j:
            raise BoundViolated(f"instance has more than {bound.j} voters")
        limits = SizeLimits(
            max_candidates=SizeLimits().max_candidates,
            max_voters=bound.j,
            max_subsets=max(1 << (2 * bound.j), 16),
        )
        return solve_control_exact(instance, limits)

    if len(instance.election.candidates) > bound.j:
        raise BoundViolated(f"instance has more than {bound.j} candidates")
    return _fpt_bc_voter(instance)


def _pattern_table(names, pattern, pairs) -> OutcomeTable:
    n = len(names)
    res = np.zeros((n, n), dtype=np.int8)
    for (i, j), r in zip(pairs, pattern):
        res[i, j] = r
        res[j, i] = -r
    return OutcomeTable(names, res, 0, tally=[[0] * n for _ in range(n)])


def _margin_requirements(pattern):
    # result +1 needs margin >= 1, 0 needs == 0, -1 needs <= -1
    return list(pattern)


def _box_feasible(consts, coeff_rows, requirements, upper, budget):
    """Integer point with 0 <= x_i <= upper_i, sum(x) <= budget (or None),
    and for each row: sign(const + sum(coef * x)) matching the requirement.

    Plain branch-and-bound over variable boxes with interval pruning; the
    box is bisected on the widest variable until forced or pruned.
    """
    nvars = len(upper)

    def bounds_of(row_idx, box):
        lo = consts[row_idx]
        hi = consts[row_idx]
        for coef, (xlo, xhi) in zip(coeff_rows[row_idx], box):
            if coef > 0:
                lo += coef * xlo
                hi += coef * xhi
            else:
                lo += coef * xhi
                hi += coef * xlo
        return lo, hi

    def compatible(req, lo, hi):
        if req > 0:
            return hi >= 1
        if req < 0:
            return lo <= -1
        return lo <= 0 <= hi

    def forced(req, lo, hi):
        if req > 0:
            return lo >= 1
        if req < 0:
            return hi <= -1
        return lo == hi == 0

    stack = [tuple((0, u) for u in upper)]
    while stack:
        box = stack.pop()
        if budget is not None and sum(lo for lo, _ in box) > budget:
            continue
        ok = True
        all_forced = True
        for r in range(len(requirements)):
            lo, hi = bounds_of(r, box)
            if not compatible(requirements[r], lo, hi):
                ok = False
                break
            if not forced(requirements[r], lo, hi):
                all_forced = False
        if not ok:
            continue
        if all_forced:
            return [lo for lo, _ in box]  # cheapest corner also meets the budget
        widest = max(range(nvars), key=lambda i: box[i][1] - box[i][0])
        lo, hi = box[widest]
        if lo == hi:
            # All ranges single but not forced: check the point directly.
            point = [b[0] for b in box]
            good = all(
                forced(requirements[r], *bounds_of(r, box))
                for r in range(len(requirements))
            )
            if good and (budget is None or sum(point) <= budget):
                return point
            continue
        mid = (lo + hi) // 2
        stack.append(tuple((l, mid if i == widest else h) for i, (l, h) in enumerate(box)))
        stack.append(tuple((mid + 1 if i == widest else l, h) for i, (l, h) in enumerate(box)))
    return None


def _fpt_bc_voter(instance: ControlInstance) -> Optional[Witness]:
    kind = instance.kind()
    alpha = instance.alpha
    goal = instance.effective_goal()
    election = instance.election
    names = election.candidates
    n = len(names)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    index = {c: i for i, c in enumerate(names)}

    def margin_signs(ballot):
        mat = _pair_matrix(ballot, index)
        return [1 if mat[i][j] else -1 for i, j in pairs]

    base_types = _ballot_types(election.ballots)
    base_margin = [0] * len(pairs)
    for b, cnt in base_types:
        for key, sgn in enumerate(margin_signs(b)):
            base_margin[key] += sgn * cnt

    if kind in ("AV", "DV"):
        action_types = _ballot_types(instance.pool) if kind == "AV" else base_types
        signs = [margin_signs(b) for b, _ in action_types]
        uppers = [min(cnt, instance.k) for _, cnt in action_types]
        direction = 1 if kind == "AV" else -1
        for pattern in itertools.product((1, 0, -1), repeat=len(pairs)):
            if not evaluate_goal(_pattern_table(names, pattern, pairs), alpha, goal):
                continue
            coeff_rows = [
                [direction * signs[i][key] for i in range(len(action_types))]
                for key in range(len(pairs))
            ]
            point = _box_feasible(base_margin, coeff_rows, list(pattern), uppers, instance.k)
            if point is not None:
                chosen = tuple(
                    b.with_multiplicity(x)
                    for (b, _), x in zip(action_types, point) if x
                )
                witness = AddedVoters(chosen) if kind == "AV" else DeletedVoters(chosen)
                assert apply_witness(instance, witness)
                return witness
        return None

    # PV: enumerate outcome-pattern pairs for the two sides; the final round
    # runs over all voters, so its table is the full table restricted.
    rule = TP if kind.endswith("TP") else TE
    full = outcome_table(election)
    signs = [margin_signs(b) for b, _ in base_types]
    uppers = [cnt for _, cnt in base_types]
    t, s = alpha.den, alpha.num

    def survivors(pattern):
        wins = [0] * n
        ties = [0] * n
        for (i, j), r in zip(pairs, pattern):
            if r == 1:
                wins[i] += 1
            elif r == -1:
                wins[j] += 1
            else:
                ties[i] += 1
                ties[j] += 1
        scores = [t * w + s * x for w, x in zip(wins, ties)]
        top = max(scores)
        surv = frozenset(names[i] for i in range(n) if scores[i] == top)
        if rule == TE and len(surv) != 1:
            return frozenset()
        return surv

    all_patterns = list(itertools.product((1, 0, -1), repeat=len(pairs)))
    surv_of = {pat: survivors(pat) for pat in all_patterns}
    for pat1 in all_patterns:
        for pat2 in all_patterns:
            finalists = surv_of[pat1] | surv_of[pat2]
            if finalists:
                final = full.restrict([c for c in names if c in finalists])
                ok = _lenient_goal(final, alpha, goal)
            else:
                ok = (evaluate_goal_on_winners(frozenset(), goal)
                      if isinstance(goal, WINNER_GOALS) else False)
            if not ok:
                continue
            # Side 1 must realize pat1 and the complement side pat2.
            coeff_rows = [
                [signs[i][key] for i in range(len(base_types))]
                for key in range(len(pairs))
            ]
            consts = [0] * len(pairs) + base_margin
            rows = coeff_rows + [[-c for c in row] for row in coeff_rows]
            reqs = list(pat1) + list(pat2)
            point = _box_feasible(consts, rows, reqs, uppers, None)
            if point is not None:
                first = tuple(
                    b.with_multiplicity(x)
                    for (b, _), x in zip(base_types, point) if x
                )
                second = tuple(
                    b.with_multiplicity(cnt - x)
                    for (b, cnt), x in zip(base_types, point) if cnt - x
                )
                witness = VoterPartitionWitness(first, second)
                assert apply_witness(instance, witness)
                return witness
    return None
