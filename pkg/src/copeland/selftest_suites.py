"""Built-in invariant suites behind `copeland selftest`.

Each suite returns a short detail string on success and raises on failure.
These are condensed versions of the full acceptance grids.
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import (
    Alpha,
    Election,
    LinearOrder,
    NONUNIQUE,
    PreferenceTable,
    TE,
    TP,
    UNIQUE,
    copeland_scores,
    outcome_table,
)
from .realize import DesiredOutcomes, ScoredSpec, build_pad, build_scored, realize_outcomes
from .reductions import ControlInstance, Graph, reduce_vc_to_ccacu, reduce_vc_to_ccdc, reduce_vc_to_ccrpc, vc_brute, verify_reduction
from .solvers_exact import SizeLimits, solve_control_exact, solve_microbribery_exact
from .solvers_fast import destructive_microbribery_dp, destructive_partition_candidate, greedy_destructive_candidate

ALPHAS = [Alpha(0, 1), Alpha(1, 3), Alpha(1, 2), Alpha(2, 3), Alpha(1, 1)]
LIMITS = SizeLimits(max_subsets=1 << 22, max_voters=64)


def random_pattern(rng, names):
    spec = DesiredOutcomes(tuple(names))
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            r = rng.choice((1, 0, -1))
            if r == 1:
                spec.set_beats(a, b)
            elif r == -1:
                spec.set_beats(b, a)
    return spec


def suite_realize_roundtrip(rng):
    count = 0
    names3 = ("a", "b", "c")
    for combo in itertools.product((1, 0, -1), repeat=3):
        spec = DesiredOutcomes(names3)
        for (a, b), r in zip((("a", "b"), ("a", "c"), ("b", "c")), combo):
            if r == 1:
                spec.set_beats(a, b)
            elif r == -1:
                spec.set_beats(b, a)
        got = outcome_table(realize_outcomes(spec)).result_matrix
        assert np.array_equal(got, spec.res), "round-trip mismatch"
        count += 1
    for _ in range(40):
        names = tuple(f"c{i}" for i in range(rng.randrange(1, 9)))
        spec = random_pattern(rng, names)
        got = outcome_table(realize_outcomes(spec)).result_matrix
        assert np.array_equal(got, spec.res)
        count += 1
    return f"{count} patterns"


def suite_pad(rng):
    for n in range(0, 13):
        pad = build_pad(n)
        for alpha in ALPHAS:
            scores = copeland_scores(pad, alpha).scaled
            assert set(scores.values()) == {n * alpha.den}, f"pad {n} at {alpha}"
    return "n <= 12, 5 alphas"


def suite_construction_lemma(rng):
    for _ in range(12):
        n = rng.randrange(1, 7)
        names = tuple(f"c{i}" for i in range(n))
        base = realize_outcomes(random_pattern(rng, names))
        kvec = tuple(rng.randrange(0, n + 1) for _ in range(n))
        alpha = rng.choice(ALPHAS)
        build_scored(ScoredSpec(base, kvec), alpha)  # self-checking
    return "12 random bases"


def suite_greedy_equivalence(rng):
    count = 0
    for _ in range(120):
        n = rng.randrange(2, 6)
        names = tuple(f"c{i}" for i in range(n))
        e = realize_outcomes(random_pattern(rng, names))
        alpha = rng.choice(ALPHAS)
        model = rng.choice((NONUNIQUE, UNIQUE))
        inst = ControlInstance("DCDC", model, alpha, e, names[0], k=rng.randrange(0, 3))
        assert (greedy_destructive_candidate(inst) is None) == \
               (solve_control_exact(inst, LIMITS) is None), f"DCDC mismatch"
        count += 1
        if n >= 3:
            inst = ControlInstance("DCAC", model, alpha, e, names[0],
                                   spoilers=(names[-1],), k=rng.randrange(0, 2))
            assert (greedy_destructive_candidate(inst) is None) == \
                   (solve_control_exact(inst, LIMITS) is None), "DCAC mismatch"
            count += 1
    return f"{count} instances"


def suite_partition_equivalence(rng):
    count = 0
    for _ in range(100):
        n = rng.randrange(1, 6)
        names = tuple(f"c{i}" for i in range(n))
        e = realize_outcomes(random_pattern(rng, names))
        alpha = rng.choice(ALPHAS)
        model = rng.choice((NONUNIQUE, UNIQUE))
        prob = rng.choice(("DCPC-TP", "DCPC-TE", "DCRPC-TP", "DCRPC-TE"))
        inst = ControlInstance(prob, model, alpha, e, names[0])
        assert (destructive_partition_candidate(inst) is None) == \
               (solve_control_exact(inst, LIMITS) is None), f"{prob} mismatch"
        count += 1
    return f"{count} instances"


def suite_microbribery_equivalence(rng):
    pairs3 = (("a", "b"), ("a", "c"), ("b", "c"))
    count = 0
    for _ in range(60):
        nv = rng.randrange(1, 4)
        ballots = tuple(
            PreferenceTable.from_pairs(
                [(x, y) if rng.random() < 0.5 else (y, x) for x, y in pairs3])
            for _ in range(nv)
        )
        e = Election(("a", "b", "c"), ballots)
        alpha = rng.choice(ALPHAS)
        model = rng.choice((NONUNIQUE, UNIQUE))
        k = rng.randrange(0, 3)
        fast = destructive_microbribery_dp(e, alpha, "a", k, model)
        slow = solve_microbribery_exact(e, alpha, "a", k, "DC", model, LIMITS)
        assert (fast is None) == (slow is None), "microbribery mismatch"
        count += 1
    return f"{count} instances"


def suite_reductions(rng):
    single = Graph.of(2, [(1, 2)])
    path3 = Graph.of(3, [(1, 2), (2, 3)])
    k3 = Graph.of(3, [(1, 2), (1, 3), (2, 3)])
    half = Alpha(1, 2)
    checked = 0
    for g in (single, path3, k3):
        for k in (0, 1, 2):
            for model in (NONUNIQUE, UNIQUE):
                inst = reduce_vc_to_ccdc(g, k, half, model)
                rep = verify_reduction(g, k, inst, LIMITS)
                assert rep.agree, f"CCDC disagreement on {g} k={k} {model}"
                checked += 1
                if g.m:
                    inst = reduce_vc_to_ccacu(g, k, half, model)
                    rep = verify_reduction(g, k, inst, LIMITS)
                    assert rep.agree, f"CCAC_u disagreement on {g} k={k} {model}"
                    checked += 1
    for k in (0, 1):
        for rule in (TP, TE):
            for model in (NONUNIQUE, UNIQUE):
                inst = reduce_vc_to_ccrpc(single, k, rule, half, model)
                rep = verify_reduction(single, k, inst, LIMITS)
                assert rep.agree, f"CCRPC-{rule} disagreement k={k} {model}"
                checked += 1
    return f"{checked} reductions verified"


def all_suites(quick: bool):
    suites = [
        ("realize-roundtrip", suite_realize_roundtrip),
        ("pad-scores", suite_pad),
        ("construction-lemma", suite_construction_lemma),
        ("greedy-vs-exact", suite_greedy_equivalence),
        ("partition-vs-exact", suite_partition_equivalence),
        ("microbribery-vs-exact", suite_microbribery_equivalence),
    ]
    if not quick:
        suites.append(("reduction-verification", suite_reductions))
    return suites
