"""The compiled tally kernel and the numpy fallback must agree exactly."""

import numpy as np
import pytest

from copeland import _tally
from copeland.core import Alpha, Election, LinearOrder, copeland_scores, outcome_table
from conftest import random_election


def test_extension_is_available():
    # The package ships the compiled kernel; the fallback exists for the
    # benchmark and as a safety net.
    assert _tally.USING_EXTENSION or "COPELAND_FORCE_PY" in __import__("os").environ


def test_kernel_matches_fallback(rng):
    for _ in range(60):
        c = rng.randrange(2, 13)
        v = rng.randrange(1, 25)
        orders = np.array(
            [rng.sample(range(c), c) for _ in range(v)], dtype=np.int32)
        mults = np.array([rng.randrange(1, 9) for _ in range(v)], dtype=np.int64)
        a = np.zeros((c, c), dtype=np.int64)
        b = np.zeros((c, c), dtype=np.int64)
        _tally.accumulate_linear(orders, mults, a)
        _tally._accumulate_linear_py(orders, mults, b)
        assert np.array_equal(a, b)


def test_int64_path_for_large_multiplicities():
    orders = np.array([[0, 1, 2], [2, 1, 0]], dtype=np.int32)
    mults = np.array([3 * 10 ** 9, 4 * 10 ** 9], dtype=np.int64)
    a = np.zeros((3, 3), dtype=np.int64)
    b = np.zeros((3, 3), dtype=np.int64)
    _tally.accumulate_linear(orders, mults, a)
    _tally._accumulate_linear_py(orders, mults, b)
    assert np.array_equal(a, b)
    assert a[0, 1] == 3 * 10 ** 9


def test_arbitrary_precision_beyond_int64():
    huge = 1 << 70
    e = Election(("a", "b"), (LinearOrder(("a", "b"), huge),
                              LinearOrder(("b", "a"), huge + 1)))
    t = outcome_table(e)
    assert t.tally("a", "b") == huge
    assert t.result("b", "a") == 1
    scores = copeland_scores(e, Alpha(1, 2)).scaled
    assert scores == {"a": 0, "b": 2}


def test_mixed_ballot_kinds(rng):
    for _ in range(20):
        e = random_election(rng, max_candidates=6, max_units=8)
        t = outcome_table(e)
        for i, a in enumerate(e.candidates):
            for b in e.candidates[i + 1:]:
                naive = sum(x.multiplicity for x in e.ballots if x.prefers(a, b))
                assert t.tally(a, b) == naive
