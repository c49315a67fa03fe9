"""Vertex-cover reductions: control instances realizing the hardness proofs.

Every generator checks its own score clauses by recomputing exact scaled
scores on the built election and aborts on any mismatch.  Generators are
deterministic: identical inputs give identical instances.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (
    Alpha,
    Ballot,
    Election,
    GoalSpec,
    LinearOrder,
    NONUNIQUE,
    PreferenceTable,
    TE,
    TP,
    UNIQUE,
    goal_for,
    outcome_table,
)
from .realize import (
    DesiredOutcomes,
    InfeasibleSpec,
    ScoredSpec,
    build_scored,
    realize_outcomes,
    tournament_from_out_degrees,
)


class AlphaOutOfRange(ValueError):
    pass


class EmptyGraph(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Undirected graph on vertices 1..n with no loops or duplicate edges."""

    n: int
    edges: tuple

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if not (1 <= u <= self.n and 1 <= v <= self.n) or u == v:
                raise ValueError(f"bad edge ({u}, {v})")
            key = frozenset((u, v))
            if key in seen:
                raise ValueError(f"duplicate edge ({u}, {v})")
            seen.add(key)

    @classmethod
    def of(cls, n: int, edges) -> "Graph":
        return cls(n, tuple(sorted(tuple(sorted(e)) for e in edges)))

    @property
    def m(self) -> int:
        return len(self.edges)

    def degree(self, u: int) -> int:
        return sum(1 for e in self.edges if u in e)


def vc_brute(g: Graph, k: int) -> bool:
    """Exhaustively decide whether some <=k vertices touch every edge."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if not g.edges:
        return True
    for size in range(0, min(k, g.n) + 1):
        for cover in itertools.combinations(range(1, g.n + 1), size):
            cset = set(cover)
            if all(u in cset or v in cset for u, v in g.edges):
                return True
    return False


CONSTRUCTIVE = "CC"
DESTRUCTIVE = "DC"

CONTROL_TYPES = ("AC_u", "AC", "DC", "PC-TP", "PC-TE", "RPC-TP", "RPC-TE",
                 "AV", "DV", "PV-TP", "PV-TE")
BOUNDED_TYPES = ("AC", "DC", "AV", "DV")
CANDIDATE_TYPES = ("AC_u", "AC", "DC", "PC-TP", "PC-TE", "RPC-TP", "RPC-TE")
PROBLEMS = tuple(f"{d}{t}" for d in (CONSTRUCTIVE, DESTRUCTIVE) for t in CONTROL_TYPES)


def split_problem(problem: str):
    """A problem code like 'CCRPC-TP' into direction 'CC' and type 'RPC-TP'."""
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}")
    return problem[:2], problem[2:]


@dataclass(frozen=True)
class ControlInstance:
    """One decision-problem instance: election, action budget, and goal.

    For adding-candidates problems, ``election`` ranges over registered
    candidates plus spoilers (ballots cover the union); elsewhere spoilers
    are empty and ``registered`` equals the candidate tuple.
    """

    problem: str
    model: str
    alpha: Alpha
    election: Election
    distinguished: str
    spoilers: tuple = ()
    pool: tuple = ()
    k: Optional[int] = None
    goal: Optional[GoalSpec] = None

    def __post_init__(self):
        direction, kind = split_problem(self.problem)
        if self.model not in (NONUNIQUE, UNIQUE):
            raise ValueError(f"bad model {self.model!r}")
        if self.distinguished not in self.election:
            raise ValueError(f"distinguished candidate {self.distinguished!r} not in election")
        if (kind in BOUNDED_TYPES) != (self.k is not None):
            raise ValueError("k must be present exactly for AC/DC/AV/DV")
        if bool(self.spoilers) and not kind.startswith("AC"):
            raise ValueError("spoilers only belong to adding-candidates problems")
        if self.pool and kind != "AV":
            raise ValueError("a voter pool only belongs to adding-voters problems")
        if self.distinguished in self.spoilers:
            raise ValueError("distinguished candidate cannot be a spoiler")

    @property
    def registered(self) -> tuple:
        if self.spoilers:
            drop = frozenset(self.spoilers)
            return tuple(c for c in self.election.candidates if c not in drop)
        return self.election.candidates

    def direction(self) -> str:
        return split_problem(self.problem)[0]

    def kind(self) -> str:
        return split_problem(self.problem)[1]

    def effective_goal(self) -> GoalSpec:
        if self.goal is not None:
            return self.goal
        return goal_for(self.direction(), self.model, self.distinguished)

    def registered_election(self) -> Election:
        if self.spoilers:
            return self.election.restrict(self.registered)
        return self.election


# --- Witness certificates -------------------------------------------------

@dataclass(frozen=True)
class AddedCandidates:
    candidates: frozenset


@dataclass(frozen=True)
class DeletedCandidates:
    candidates: frozenset


@dataclass(frozen=True)
class CandidatePartitionWitness:
    first: tuple  # the side evaluated first (filtered side for PC)
    second: tuple


@dataclass(frozen=True)
class AddedVoters:
    ballots: tuple


@dataclass(frozen=True)
class DeletedVoters:
    ballots: tuple


@dataclass(frozen=True)
class VoterPartitionWitness:
    first: tuple
    second: tuple


@dataclass(frozen=True)
class BribedBallots:
    replacements: tuple  # ((unit index, replacement ballot), ...)


@dataclass(frozen=True)
class Flips:
    flips: tuple  # ((unit index, (a, b)), ...)


Witness = object


# --- CCDC: constructive control by deleting candidates ---------------------

def _vertex_name(u: int) -> str:
    return f"v{u}"


def _edge_name(i: int) -> str:
    return f"e{i}"


def _ccdc_outcomes(g: Graph, model: str) -> DesiredOutcomes:
    """Head-to-head pattern of the deleting-candidates hardness election.

    The prose contest list and the score list of the source proof disagree
    about r versus the edge candidates; r beats every edge candidate here,
    which reproduces the stated scores exactly.
    """
    n, m = g.n, g.m
    pad_len = n + m
    pads = [f"pad{i}" for i in range(2 * pad_len + 1)]
    names = (["p", "r"]
             + [_edge_name(i) for i in range(1, m + 1)]
             + [_vertex_name(u) for u in range(1, n + 1)]
             + pads)
    if model == UNIQUE:
        names.append("rclone")
    spec = DesiredOutcomes(names)

    spec.set_beats("p", "r")
    for i, (u, v) in enumerate(g.edges, start=1):
        e = _edge_name(i)
        spec.set_beats("r", e)
        spec.set_beats(e, _vertex_name(u))
        spec.set_beats(e, _vertex_name(v))
        for pad in pads:
            spec.set_beats(e, pad)
    for u in range(1, g.n + 1):
        vu = _vertex_name(u)
        spec.set_beats(vu, "p")
        for i, edge in enumerate(g.edges, start=1):
            if u not in edge:
                spec.set_beats(vu, _edge_name(i))
    for i, pad in enumerate(pads):
        spec.set_beats("p", pad)
        spec.set_beats(pad, "r")
        for u in range(1, g.n + 1):
            spec.set_beats(pad, _vertex_name(u))
        for d in range(1, pad_len + 1):
            spec.set_beats(pad, pads[(i + d) % len(pads)])
    if model == UNIQUE:
        # rclone ties r and mirrors r everywhere else.
        spec.set_beats("p", "rclone")
        for i in range(1, m + 1):
            spec.set_beats("rclone", _edge_name(i))
        for pad in pads:
            spec.set_beats(pad, "rclone")
    return spec


def _check_ccdc_scores(election: Election, g: Graph, alpha: Alpha, model: str):
    t, s = alpha.den, alpha.num
    n, m = g.n, g.m
    pad_len = n + m
    scores = outcome_table(election).scaled_scores(alpha)
    unique = model == UNIQUE
    clone = 1 if unique else 0
    expect = {
        "p": t * (2 * pad_len + 2 + clone) + s * m,
        "r": t * m + s * (n + clone),
    }
    for i in range(1, m + 1):
        expect[_edge_name(i)] = t * (2 * pad_len + 3) + s * m
    for u in range(1, n + 1):
        expect[_vertex_name(u)] = t * (1 + m - g.degree(u)) + s * (n + clone)
    for i in range(2 * pad_len + 1):
        expect[f"pad{i}"] = t * (pad_len + n + 1 + clone)
    if unique:
        expect["rclone"] = expect["r"]
    for c, want in expect.items():
        if scores[c] != want:
            raise InfeasibleSpec(f"CCDC self-check failed at {c}: {scores[c]} != {want}")


def reduce_vc_to_ccdc(g: Graph, k: int, alpha: Alpha, model: str = NONUNIQUE) -> ControlInstance:
    """Deleting-candidates instance that is YES iff g has a <=k vertex cover."""
    if k < 0:
        raise ValueError("k must be >= 0")
    election = realize_outcomes(_ccdc_outcomes(g, model))
    _check_ccdc_scores(election, g, alpha, model)
    return ControlInstance(
        problem="CCDC", model=model, alpha=alpha, election=election,
        distinguished="p", k=k,
    )


# --- CCAC_u: constructive control by adding unlimited candidates ------------

def reduce_vc_to_ccacu(g: Graph, k: int, alpha: Alpha, model: str = NONUNIQUE) -> ControlInstance:
    """Unlimited-adding instance over 2l^2 + l registered candidates, l = 2n+2m.

    The distinguished candidate ties every spoiler vertex; vertex u beats
    exactly its incident edge candidates and ties the rest; every other
    registered candidate beats every spoiler.
    """
    if not 0 < alpha.num < alpha.den:
        raise AlphaOutOfRange("the unlimited-adding reduction needs 0 < alpha < 1")
    if g.m == 0:
        raise EmptyGraph("need at least one edge")
    if k < 0:
        raise ValueError("k must be >= 0")
    n, m = g.n, g.m
    ell = 2 * n + 2 * m
    t, s = alpha.den, alpha.num

    # Base candidates for the score-targeting construction (size exactly l).
    pad_count = ell - m - 2
    pads = [f"x{i}" for i in range(1, pad_count + 1)]
    base_names = ["p", "r"] + [_edge_name(i) for i in range(1, m + 1)] + pads

    # Tie bookkeeping: ties raise a candidate's score by alpha each, and the
    # construction's k_c entry absorbs the rest of the target.
    if model == UNIQUE:
        if k == 0:
            r_ties, r_k = t - 1, s + 2  # -(s+2) + alpha*(t-1) = -2 - alpha
        else:
            r_ties, r_k = k - 1, k + 2
    else:
        r_ties, r_k = k, k + 2
    e_ties = 1 if model == NONUNIQUE else 0
    if r_k > ell:
        raise InfeasibleSpec(f"score shift for r needs k_r = {r_k} > l = {ell}")

    tie_demand = [("r", r_ties)] + [(_edge_name(i), e_ties) for i in range(1, m + 1)]
    pad_cap = ell - n - 2  # keeps k_x = n + 2 + ties within [0, l]
    pad_ties = {x: [] for x in pads}
    cursor = 0
    for name, count in tie_demand:
        for _ in range(count):
            placed = False
            for _ in range(pad_count):
                x = pads[cursor]
                cursor = (cursor + 1) % pad_count
                if len(pad_ties[x]) < pad_cap:
                    pad_ties[x].append(name)
                    placed = True
                    break
            if not placed:
                raise InfeasibleSpec("not enough padding candidates to host ties")

    tie_pairs = {frozenset((x, c)) for x, mates in pad_ties.items() for c in mates}
    base_spec = DesiredOutcomes(base_names)
    for i, a in enumerate(base_names):
        for b in base_names[i + 1:]:
            if frozenset((a, b)) not in tie_pairs:
                base_spec.set_beats(a, b)

    kvec = {"p": 2, "r": r_k}
    for i in range(1, m + 1):
        kvec[_edge_name(i)] = 2
    for x in pads:
        kvec[x] = n + 2 + len(pad_ties[x])
    base = realize_outcomes(base_spec)
    registered = build_scored(
        ScoredSpec(base, tuple(kvec[c] for c in base_names)), alpha, dummy_prefix="y",
    )

    # Append the spoiler vertex candidates with the proof's cross results.
    reg_names = registered.candidates
    verts = [_vertex_name(u) for u in range(1, n + 1)]
    reg_res = outcome_table(registered).result_matrix
    names = tuple(reg_names) + tuple(verts)
    spec = DesiredOutcomes(names)
    spec.res[:len(reg_names), :len(reg_names)] = reg_res
    incident = {
        _edge_name(i): set(edge) for i, edge in enumerate(g.edges, start=1)
    }
    for u in range(1, n + 1):
        vu = _vertex_name(u)
        for c in reg_names:
            if c == "p":
                continue  # p ties every vertex
            if c in incident and u in incident[c]:
                spec.set_beats(vu, c)
            elif c in incident:
                continue  # non-incident edge candidates tie the vertex
            else:
                spec.set_beats(c, vu)
    election = realize_outcomes(spec)

    _check_ccacu_scores(election, g, k, alpha, model, reg_names)
    return ControlInstance(
        problem="CCAC_u", model=model, alpha=alpha, election=election,
        distinguished="p", spoilers=tuple(verts),
    )


def _check_ccacu_scores(election, g, k, alpha, model, reg_names):
    t, s = alpha.den, alpha.num
    n, m = g.n, g.m
    ell = 2 * n + 2 * m
    table = outcome_table(election).restrict(reg_names)
    scores = table.scaled_scores(alpha)
    base = t * (2 * ell * ell - 2)
    if scores["p"] != base:
        raise InfeasibleSpec(f"CCAC_u self-check failed at p: {scores['p']} != {base}")
    want_r = t * (2 * ell * ell - 2 - k) + s * (k if model == NONUNIQUE else k - 1)
    if scores["r"] != want_r:
        raise InfeasibleSpec(f"CCAC_u self-check failed at r: {scores['r']} != {want_r}")
    want_e = base + (s if model == NONUNIQUE else 0)
    for i in range(1, m + 1):
        if scores[_edge_name(i)] != want_e:
            raise InfeasibleSpec(f"CCAC_u self-check failed at e{i}")
    bound = t * (2 * ell * ell - n - 2)
    skip = {"p", "r"} | {_edge_name(i) for i in range(1, m + 1)}
    for c in reg_names:
        if c not in skip and scores[c] > bound:
            raise InfeasibleSpec(f"CCAC_u padding {c} scores {scores[c]} > {bound}")


# --- CCRPC: constructive control by run-off partition ----------------------

def _rpc_block(k: int, rule: str):
    """Tie-free score block joined to the deleting-candidates election.

    The pivot scores l' inside the block; under TP two block members sit at
    exactly l'-k-1 with the rest no higher, under TE one member sits at
    l'-k with the rest strictly lower.  Realized as the smallest tournament
    with that out-degree profile.  For TE the non-pivot sub-tournament must
    also keep a unique top scorer: otherwise moving the pivot to the other
    side lets ties-eliminate empty the block's subcommittee.
    """
    if k == 0 and rule == TE:
        # pivot beats h1, h3, h4; h1 beats h2..h4; h2 beats pivot, h3;
        # h3 beats h4; h4 beats h2.  Scores (3,3,2,1,1); without the pivot
        # the h scores are (3,1,1,1).
        names = ["rr", "h1", "h2", "h3", "h4"]
        res = np.zeros((5, 5), dtype=np.int8)
        for w, l in (("rr", "h1"), ("rr", "h3"), ("rr", "h4"),
                     ("h1", "h2"), ("h1", "h3"), ("h1", "h4"),
                     ("h2", "rr"), ("h2", "h3"), ("h3", "h4"), ("h4", "h2")):
            res[names.index(w), names.index(l)] = 1
            res[names.index(l), names.index(w)] = -1
        return names, res, 3
    if k == 0:
        degrees = [3, 2, 2, 2, 1]
    else:
        q = 2 * k + 1
        if rule == TP:
            degrees = [q] + [k] * q  # pivot beats a regular tournament
        else:
            degrees = [q, k + 1] + [k] * (q - 2) + [k - 1]
    names = ["rr"] + [f"h{i}" for i in range(1, len(degrees))]
    res = tournament_from_out_degrees(degrees)
    return names, res, degrees[0]


def reduce_vc_to_ccrpc(g: Graph, k: int, rule: str, alpha: Alpha,
                       model: str = NONUNIQUE) -> ControlInstance:
    """Run-off partition instance that is YES iff g has a <=k vertex cover.

    The front block is the deleting-candidates election (unique-winner
    variant for TE and for the unique model); every front candidate beats
    the pivot and every other block member beats every front candidate.
    """
    if rule not in (TP, TE):
        raise ValueError(f"bad tie rule {rule!r}")
    if k < 0:
        raise ValueError("k must be >= 0")
    front_model = UNIQUE if (rule == TE or model == UNIQUE) else NONUNIQUE
    front_spec = _ccdc_outcomes(g, front_model)
    front = realize_outcomes(front_spec)
    _check_ccdc_scores(front, g, alpha, front_model)

    block_names, block_res, ell_prime = _rpc_block(k, rule)
    fc = front.candidates
    names = tuple(fc) + tuple(block_names)
    nf = len(fc)
    spec = DesiredOutcomes(names)
    spec.res[:nf, :nf] = front_spec.res
    spec.res[nf:, nf:] = block_res
    for f in fc:
        spec.set_beats(f, "rr")
        for h in block_names[1:]:
            spec.set_beats(h, f)
    election = realize_outcomes(spec)

    # Block score clauses, shifted by the front wins of non-pivot members.
    t = alpha.den
    scores = outcome_table(election).scaled_scores(alpha)
    if scores["rr"] != t * ell_prime:
        raise InfeasibleSpec("CCRPC self-check failed at the pivot")
    tops = sorted(
        (scores[h] - t * nf for h in block_names[1:]), reverse=True)
    if rule == TP:
        bound = t * (ell_prime - k - 1)
        if tops[0] != bound or tops[1] != bound or any(v > bound for v in tops):
            raise InfeasibleSpec("CCRPC self-check failed at the TP block")
    else:
        bound = t * (ell_prime - k)
        if tops[0] != bound or any(v >= bound for v in tops[1:]):
            raise InfeasibleSpec("CCRPC self-check failed at the TE block")

    return ControlInstance(
        problem=f"CCRPC-{rule}", model=model, alpha=alpha, election=election,
        distinguished="p",
    )


# --- Reduction verification -------------------------------------------------

@dataclass(frozen=True)
class ReductionReport:
    vertex_cover: bool
    solver: bool
    agree: bool
    scores: dict
    elapsed_ms: float


def verify_reduction(g: Graph, k: int, instance: ControlInstance, budget) -> ReductionReport:
    """Compare the exhaustive solver's answer on the instance with vc_brute."""
    from .solvers_exact import solve_control_exact

    start = time.perf_counter()
    witness = solve_control_exact(instance, budget)
    vc = vc_brute(g, k)
    scores = outcome_table(instance.registered_election()).scaled_scores(instance.alpha)
    return ReductionReport(
        vertex_cover=vc,
        solver=witness is not None,
        agree=vc == (witness is not None),
        scores=scores,
        elapsed_ms=(time.perf_counter() - start) * 1000.0,
    )
