"""Command-line interface, file formats, and the selftest harness.

Election files are line-based: a `candidates:` header, then one ballot per
line (`order M: a > b > c` or `table M: a>b, a>c, b>c`), `#` comments and
blank lines ignored.  Graph files: `graph: N` then `edge: U V` lines.
All output is deterministic; candidates print in declaration order.

Exit codes: 0 decided (either answer), 2 usage or parse error, 3 budget
exceeded.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .core import (
    Alpha,
    Election,
    ExactScaledScores,
    GroupDominance,
    LinearOrder,
    MakeUniqueWinner,
    MakeWinner,
    NONUNIQUE,
    PrecludeUniqueWinner,
    PrecludeWinner,
    PreferenceTable,
    ScoreOrder,
    TE,
    TP,
    UNIQUE,
    copeland_scores,
    outcome_table,
    winners,
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
    Graph,
    VoterPartitionWitness,
    reduce_vc_to_ccacu,
    reduce_vc_to_ccdc,
    reduce_vc_to_ccrpc,
    split_problem,
    vc_brute,
    verify_reduction,
)
from .solvers_exact import (
    BudgetExceeded,
    SizeLimits,
    solve_bribery_exact,
    solve_control_exact,
    solve_microbribery_exact,
)
from .solvers_fast import (
    BoundParameter,
    destructive_microbribery_dp,
    destructive_partition_candidate,
    fpt_candidate_control,
    fpt_voter_control,
    greedy_destructive_candidate,
)


class ParseError(ValueError):
    """A file-format error; carries the failing kind and line number."""

    def __init__(self, kind: str, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.kind = kind
        self.line = line


@dataclass(frozen=True)
class Report:
    answer: str  # "YES" | "NO"
    witness: Optional[str]
    scores: Optional[dict]
    method: str
    elapsed_ms: float


# --- Election and graph file formats -----------------------------------------


def parse_election(text: str) -> Election:
    candidates = None
    ballots = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("candidates:"):
            if candidates is not None:
                raise ParseError("syntax", lineno, "duplicate candidates line")
            names = line[len("candidates:"):].split()
            if not names:
                raise ParseError("syntax", lineno, "no candidates listed")
            if len(set(names)) != len(names):
                raise ParseError("duplicate-candidate", lineno, "candidate listed twice")
            candidates = tuple(names)
            continue
        if candidates is None:
            raise ParseError("syntax", lineno, "ballots before the candidates line")
        head, _, body = line.partition(":")
        parts = head.split()
        if len(parts) != 2 or parts[0] not in ("order", "table") or not _:
            raise ParseError("syntax", lineno, f"unrecognized line {raw.strip()!r}")
        kind, mult_text = parts
        if not mult_text.isdigit() or int(mult_text) < 1:
            raise ParseError("bad-multiplicity", lineno, f"bad multiplicity {mult_text!r}")
        mult = int(mult_text)
        if kind == "order":
            names = [c.strip() for c in body.split(">")]
            if any(not c for c in names):
                raise ParseError("syntax", lineno, "empty name in order")
            if len(set(names)) != len(names) or set(names) != set(candidates):
                raise ParseError("syntax", lineno, "order is not a permutation of the candidates")
            ballots.append(LinearOrder(tuple(names), mult))
        else:
            pairs = []
            entries = [x for x in body.split(",")] if body.strip() else []
            for entry in entries:
                entry = entry.strip()
                a, sep, b = entry.partition(">")
                a, b = a.strip(), b.strip()
                if not sep or not a or not b:
                    raise ParseError("syntax", lineno, f"bad table entry {entry!r}")
                if a not in candidates or b not in candidates:
                    raise ParseError("unknown-candidate", lineno, f"unknown candidate in {entry!r}")
                pairs.append((a, b))
            seen = {frozenset(pr) for pr in pairs}
            want = len(candidates) * (len(candidates) - 1) // 2
            if len(pairs) != want or len(seen) != want or any(len(pr) != 2 for pr in seen):
                raise ParseError("incomplete-table", lineno,
                                 "table must cover every unordered pair exactly once")
            ballots.append(PreferenceTable.from_pairs(pairs, mult))
    if candidates is None:
        raise ParseError("syntax", 0, "missing candidates line")
    try:
        return Election(candidates, tuple(ballots))
    except ValueError as exc:
        raise ParseError("syntax", 0, str(exc)) from exc


def serialize_election(election: Election) -> str:
    lines = ["candidates: " + " ".join(election.candidates)]
    order_index = {c: i for i, c in enumerate(election.candidates)}
    for ballot in election.ballots:
        if isinstance(ballot, LinearOrder):
            lines.append(f"order {ballot.multiplicity}: " + " > ".join(ballot.order))
        else:
            entries = []
            cands = election.candidates
            for i, a in enumerate(cands):
                for b in cands[i + 1:]:
                    entries.append(f"{a}>{b}" if ballot.prefers(a, b) else f"{b}>{a}")
            lines.append(f"table {ballot.multiplicity}: " + ", ".join(entries))
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("graph:"):
            if n is not None:
                raise ParseError("syntax", lineno, "duplicate graph line")
            body = line[len("graph:"):].strip()
            if not body.isdigit():
                raise ParseError("syntax", lineno, f"bad vertex count {body!r}")
            n = int(body)
            continue
        if line.startswith("edge:"):
            if n is None:
                raise ParseError("syntax", lineno, "edge before the graph line")
            parts = line[len("edge:"):].split()
            if len(parts) != 2 or not all(p.isdigit() for p in parts):
                raise ParseError("syntax", lineno, f"bad edge {line!r}")
            u, v = int(parts[0]), int(parts[1])
            if not (1 <= u <= n and 1 <= v <= n) or u == v:
                raise ParseError("bad-vertex", lineno, f"bad edge ({u}, {v})")
            if frozenset((u, v)) in {frozenset(e) for e in edges}:
                raise ParseError("duplicate-edge", lineno, f"duplicate edge ({u}, {v})")
            edges.append((u, v))
            continue
        raise ParseError("syntax", lineno, f"unrecognized line {raw.strip()!r}")
    if n is None:
        raise ParseError("syntax", 0, "missing graph line")
    return Graph.of(n, edges)


def serialize_graph(g: Graph) -> str:
    lines = [f"graph: {g.n}"] + [f"edge: {u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def parse_goal(text: str):
    kind, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"bad goal {text!r}")
    if kind == "winner":
        return MakeWinner(body)
    if kind == "unique":
        return MakeUniqueWinner(body)
    if kind == "notwinner":
        return PrecludeWinner(body)
    if kind == "notunique":
        return PrecludeUniqueWinner(body)
    if kind == "order":
        constraints = []
        for item in body.split(","):
            for rel in ("<=", "=", "<"):
                if rel in item:
                    a, _, b = item.partition(rel)
                    constraints.append((a.strip(), rel, b.strip()))
                    break
            else:
                raise ValueError(f"bad order constraint {item!r}")
        return ScoreOrder(tuple(constraints))
    if kind == "scores":
        scores = []
        for item in body.split(","):
            c, sep2, v = item.partition("=")
            if not sep2 or not v.strip().lstrip("-").isdigit():
                raise ValueError(f"bad score constraint {item!r}")
            scores.append((c.strip(), int(v)))
        return ExactScaledScores(tuple(scores))
    if kind == "dom":
        above, sep2, below = body.partition(">")
        if not sep2:
            raise ValueError(f"bad dominance goal {body!r}")
        return GroupDominance(
            frozenset(x.strip() for x in above.split("+") if x.strip()),
            frozenset(x.strip() for x in below.split("+") if x.strip()),
        )
    raise ValueError(f"unknown goal kind {kind!r}")


# --- Witness formatting --------------------------------------------------------


def _ballot_line(ballot, candidates) -> str:
    if isinstance(ballot, LinearOrder):
        return f"order {ballot.multiplicity}: " + " > ".join(ballot.order)
    entries = []
    for i, a in enumerate(candidates):
        for b in candidates[i + 1:]:
            entries.append(f"{a}>{b}" if ballot.prefers(a, b) else f"{b}>{a}")
    return f"table {ballot.multiplicity}: " + ", ".join(entries)


def format_witness(witness, candidates) -> str:
    order = {c: i for i, c in enumerate(candidates)}

    def ordered(names):
        return " ".join(sorted(names, key=lambda c: order.get(c, len(order))))

    if isinstance(witness, AddedCandidates):
        return "add: " + ordered(witness.candidates)
    if isinstance(witness, DeletedCandidates):
        return "delete: " + ordered(witness.candidates)
    if isinstance(witness, CandidatePartitionWitness):
        return "first: " + ordered(witness.first) + "\nsecond: " + ordered(witness.second)
    if isinstance(witness, AddedVoters):
        return "\n".join("add-voter " + _ballot_line(b, candidates) for b in witness.ballots) or "add-voter none"
    if isinstance(witness, DeletedVoters):
        return "\n".join("delete-voter " + _ballot_line(b, candidates) for b in witness.ballots) or "delete-voter none"
    if isinstance(witness, VoterPartitionWitness):
        lines = ["first " + _ballot_line(b, candidates) for b in witness.first]
        lines += ["second " + _ballot_line(b, candidates) for b in witness.second]
        return "\n".join(lines) if lines else "empty partition"
    if isinstance(witness, BribedBallots):
        return "\n".join(
            f"bribe {i}: " + _ballot_line(b, candidates) for i, b in witness.replacements
        ) or "bribe none"
    if isinstance(witness, Flips):
        return "\n".join(f"flip {i}: {a} {b}" for i, (a, b) in witness.flips) or "flip none"
    return repr(witness)


# --- Commands -------------------------------------------------------------------


USAGE_EXIT = 2
BUDGET_EXIT = 3

BRIBERY_CODES = ("CB", "DB", "CMB", "DMB")


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_spoilers(path):
    tokens = []
    for raw in _read(path).splitlines():
        line = raw.split("#", 1)[0].strip()
        tokens.extend(line.split())
    return tuple(tokens)


def _normalize_problem(code: str) -> str:
    code = code.replace("CCACu", "CCAC_u").replace("DCACu", "DCAC_u")
    # run-off partition of voters is an alias for partition of voters
    return code.replace("RPV", "PV")


def cmd_score(args) -> int:
    alpha = Alpha.parse(args.alpha)
    election = parse_election(_read(args.election))
    vector = copeland_scores(election, alpha)
    for c in election.candidates:
        print(f"{c}\t{vector.scaled[c]}/{alpha.den}")
    return 0


def cmd_winners(args) -> int:
    alpha = Alpha.parse(args.alpha)
    election = parse_election(_read(args.election))
    win = winners(election, alpha, args.model)
    print(" ".join(c for c in election.candidates if c in win))
    return 0


def _build_instance(args, election, alpha):
    problem = _normalize_problem(args.problem)
    spoilers = _load_spoilers(args.spoiler_candidates) if args.spoiler_candidates else ()
    pool = ()
    if args.voter_pool:
        pool_election = parse_election(_read(args.voter_pool))
        if pool_election.candidates != election.candidates:
            raise ValueError("voter pool must range over the same candidates")
        pool = tuple(pool_election.ballots)
    return ControlInstance(
        problem=problem, model=args.model, alpha=alpha, election=election,
        distinguished=args.p, spoilers=spoilers, pool=pool, k=args.k,
        goal=parse_goal(args.goal) if args.goal else None,
    )


def cmd_solve(args) -> int:
    alpha = Alpha.parse(args.alpha)
    election = parse_election(_read(args.election))
    limits = SizeLimits(max_subsets=args.max_subsets, max_voters=args.max_voters)
    start = time.perf_counter()

    if args.problem in BRIBERY_CODES:
        if args.k is None or not args.p:
            print("bribery needs --k and --p", file=sys.stderr)
            return USAGE_EXIT
        direction = "CC" if args.problem.startswith("C") else "DC"
        goal = parse_goal(args.goal) if args.goal else None
        if args.problem in ("CB", "DB"):
            if args.method not in ("exact",):
                print(f"method {args.method} not available for {args.problem}", file=sys.stderr)
                return USAGE_EXIT
            witness = solve_bribery_exact(election, alpha, args.p, args.k,
                                          direction, args.model, limits, goal)
        else:
            if args.method == "dp":
                if direction != "DC":
                    print("the dp method solves destructive microbribery only", file=sys.stderr)
                    return USAGE_EXIT
                witness = destructive_microbribery_dp(election, alpha, args.p,
                                                      args.k, args.model, goal)
            elif args.method == "exact":
                witness = solve_microbribery_exact(election, alpha, args.p, args.k,
                                                   direction, args.model, limits, goal)
            else:
                print(f"method {args.method} not available for {args.problem}", file=sys.stderr)
                return USAGE_EXIT
    else:
        instance = _build_instance(args, election, alpha)
        if args.method == "exact":
            witness = solve_control_exact(instance, limits)
        elif args.method == "greedy":
            if instance.kind() in ("AC_u", "AC", "DC"):
                witness = greedy_destructive_candidate(instance)
            else:
                witness = destructive_partition_candidate(instance)
        elif args.method == "fpt":
            if not args.bound:
                print("--method fpt needs --bound BC:J or BV:J", file=sys.stderr)
                return USAGE_EXIT
            kind, _, j = args.bound.partition(":")
            bound = BoundParameter(kind, int(j))
            if instance.kind() in ("AV", "DV", "PV-TP", "PV-TE"):
                witness = fpt_voter_control(instance, bound)
            else:
                witness = fpt_candidate_control(instance, bound)
        else:
            print(f"method {args.method} not available for {args.problem}", file=sys.stderr)
            return USAGE_EXIT

    elapsed = (time.perf_counter() - start) * 1000.0
    if witness is None:
        print("NO")
    else:
        print("YES")
        text = format_witness(witness, election.candidates)
        if text:
            print(text)
    if args.timing:
        print(f"elapsed-ms: {elapsed:.1f}")
    return 0


GENERATORS = {
    "CCACu": lambda g, k, alpha, model: reduce_vc_to_ccacu(g, k, alpha, model),
    "CCAC_u": lambda g, k, alpha, model: reduce_vc_to_ccacu(g, k, alpha, model),
    "CCDC": lambda g, k, alpha, model: reduce_vc_to_ccdc(g, k, alpha, model),
    "CCRPC-TP": lambda g, k, alpha, model: reduce_vc_to_ccrpc(g, k, TP, alpha, model),
    "CCRPC-TE": lambda g, k, alpha, model: reduce_vc_to_ccrpc(g, k, TE, alpha, model),
}


def cmd_reduce(args) -> int:
    alpha = Alpha.parse(args.alpha)
    g = parse_graph(_read(args.graph))
    instance = GENERATORS[args.to](g, args.k, alpha, args.model)
    os.makedirs(args.out, exist_ok=True)
    election_path = os.path.join(args.out, "election.cop")
    with open(election_path, "w", encoding="utf-8") as fh:
        fh.write(serialize_election(instance.election))
    meta = {
        "problem": instance.problem,
        "model": instance.model,
        "alpha": str(instance.alpha),
        "distinguished": instance.distinguished,
        "k": instance.k,
        "spoilers": list(instance.spoilers),
        "election": "election.cop",
        "graph": {"n": g.n, "edges": [list(e) for e in g.edges]},
        "vc_k": args.k,
    }
    with open(os.path.join(args.out, "instance.json"), "w", encoding="utf-8") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if instance.spoilers:
        with open(os.path.join(args.out, "spoilers.txt"), "w", encoding="utf-8") as fh:
            fh.write(" ".join(instance.spoilers) + "\n")
    print(f"wrote {args.to} instance: {len(instance.election.candidates)} candidates")
    return 0


def cmd_verify_reduction(args) -> int:
    alpha = Alpha.parse(args.alpha)
    g = parse_graph(_read(args.graph))
    instance = GENERATORS[args.to](g, args.k, alpha, args.model)
    limits = SizeLimits(max_subsets=args.max_subsets, max_voters=args.max_voters)
    report = verify_reduction(g, args.k, instance, limits)
    print(f"vertex-cover: {'YES' if report.vertex_cover else 'NO'}")
    print(f"solver: {'YES' if report.solver else 'NO'}")
    print(f"agree: {'true' if report.agree else 'false'}")
    return 0


def cmd_selftest(args) -> int:
    ok = selftest(quick=args.quick)
    return 0 if ok else 1


def selftest(quick: bool = False) -> bool:
    """Run the invariant grid and print one pass/fail line per suite."""
    from . import selftest_suites

    rng = random.Random(2024)
    suites = selftest_suites.all_suites(quick)
    all_ok = True
    for name, fn in suites:
        start = time.perf_counter()
        try:
            detail = fn(rng)
            status = "PASS"
        except Exception as exc:  # noqa: BLE001 - report, do not crash
            detail = f"{type(exc).__name__}: {exc}"
            status = "FAIL"
            all_ok = False
        elapsed = time.perf_counter() - start
        print(f"{status} {name} ({elapsed:.1f}s){': ' + detail if detail else ''}")
    return all_ok


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copeland", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--alpha", required=True, help="tie reward S/T")
        p.add_argument("--election", required=True, help="election file")

    p = sub.add_parser("score", help="print scaled Copeland scores")
    common(p)
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("winners", help="print the winner set")
    common(p)
    p.add_argument("--model", choices=(NONUNIQUE, UNIQUE), default=NONUNIQUE)
    p.set_defaults(fn=cmd_winners)

    p = sub.add_parser("solve", help="decide a control or bribery problem")
    common(p)
    p.add_argument("--problem", required=True)
    p.add_argument("--method", choices=("exact", "greedy", "dp", "fpt"), default="exact")
    p.add_argument("--model", choices=(NONUNIQUE, UNIQUE), default=NONUNIQUE)
    p.add_argument("--p", required=True, help="distinguished candidate")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--spoiler-candidates", default=None)
    p.add_argument("--voter-pool", default=None)
    p.add_argument("--goal", default=None)
    p.add_argument("--bound", default=None, help="BC:J or BV:J (fpt method)")
    p.add_argument("--max-subsets", type=int, default=SizeLimits().max_subsets)
    p.add_argument("--max-voters", type=int, default=SizeLimits().max_voters)
    p.add_argument("--timing", action="store_true")
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("reduce", help="generate a control instance from a graph")
    p.add_argument("--to", required=True, choices=tuple(GENERATORS))
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--model", choices=(NONUNIQUE, UNIQUE), default=NONUNIQUE)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_reduce)

    p = sub.add_parser("verify-reduction", help="check a generator against vc_brute")
    p.add_argument("--to", required=True, choices=tuple(GENERATORS))
    p.add_argument("--graph", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", required=True)
    p.add_argument("--model", choices=(NONUNIQUE, UNIQUE), default=NONUNIQUE)
    p.add_argument("--max-subsets", type=int, default=SizeLimits().max_subsets)
    p.add_argument("--max-voters", type=int, default=SizeLimits().max_voters)
    p.set_defaults(fn=cmd_verify_reduction)

    p = sub.add_parser("selftest", help="run the built-in invariant suites")
    p.add_argument("--quick", action="store_true")
    p.set_defaults(fn=cmd_selftest)
    return parser


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET_EXIT
    except (ParseError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT


def main() -> None:
    sys.exit(run_command(sys.argv[1:]))


if __name__ == "__main__":
    main()
