import itertools
import random

import numpy as np
import pytest

from copeland.core import Alpha, Election, LinearOrder, PreferenceTable
from copeland.realize import DesiredOutcomes, realize_outcomes

ALPHA_GRID = [Alpha(0, 1), Alpha(1, 3), Alpha(1, 2), Alpha(2, 3), Alpha(1, 1)]


def names_for(n):
    return tuple(f"c{i}" for i in range(n))


def all_patterns(n):
    """Every win/tie/loss pattern on n candidates, as result matrices."""
    names = names_for(n)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for combo in itertools.product((1, 0, -1), repeat=len(pairs)):
        res = np.zeros((n, n), dtype=np.int8)
        for (i, j), r in zip(pairs, combo):
            res[i, j] = r
            res[j, i] = -r
        yield names, res


def canonical_patterns(n):
    """One pattern per equivalence class under permuting non-first candidates."""
    names = names_for(n)
    perms = [np.array((0,) + p) for p in itertools.permutations(range(1, n))]
    seen = set()
    out = []
    for _, res in all_patterns(n):
        key = min(res[np.ix_(p, p)].tobytes() for p in perms)
        if key not in seen:
            seen.add(key)
            out.append((names, res))
    return out


def pattern_election(names, res):
    return realize_outcomes(DesiredOutcomes(names, res))


def random_pattern_election(rng, n):
    names = names_for(n)
    spec = DesiredOutcomes(names)
    for i in range(n):
        for j in range(i + 1, n):
            r = rng.choice((1, 0, -1))
            if r == 1:
                spec.set_beats(names[i], names[j])
            elif r == -1:
                spec.set_beats(names[j], names[i])
    return realize_outcomes(spec)


def random_ballot(rng, names, table_ok=True, max_mult=1):
    mult = rng.randrange(1, max_mult + 1)
    if table_ok and rng.random() < 0.4:
        pairs = []
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                pairs.append((a, b) if rng.random() < 0.5 else (b, a))
        return PreferenceTable.from_pairs(pairs, mult)
    order = list(names)
    rng.shuffle(order)
    return LinearOrder(tuple(order), mult)


def random_election(rng, max_candidates=8, max_units=9, table_ok=True):
    n = rng.randrange(1, max_candidates + 1)
    names = names_for(n)
    ballots = []
    units = 0
    target = rng.randrange(1, max_units + 1)
    while units < target:
        mult = rng.randrange(1, min(3, target - units) + 1)
        b = random_ballot(rng, names, table_ok=table_ok)
        b = b.with_multiplicity(mult)
        ballots.append(b)
        units += mult
    return Election(names, tuple(ballots))


@pytest.fixture
def rng():
    return random.Random(20240810)
