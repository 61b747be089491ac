import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iocut.iomodel import IoConfig, Session
from iocut.staircase2d import Staircase, build_staircase, splice


def _build(xy, k, **kw):
    s = Session(IoConfig(64, 4))
    recs = np.column_stack([np.arange(len(xy)), xy])
    return build_staircase(s.place(recs), k, **kw)


def _depth(xy, x, y):
    return int(((xy[:, 0] <= x) & (xy[:, 1] <= y)).sum())


def _check_levels(xy, st, k):
    n = st.n
    for x, y in st.inner():
        assert _depth(xy, x, y) == k
    for x, y in st.outer:
        assert _depth(xy, x, y) <= 2 * k
    for x in range(-1, n):
        for y in range(-1, n):
            if _depth(xy, x, y) <= k:
                assert st.covers(x, y), (x, y)


def test_few_points_single_corner():
    xy = np.array([[0, 1], [1, 0]])
    st = _build(xy, 3)
    assert st.outer == [(2, 2)]


def test_eighteen_points_k3():
    # inner corners dominate exactly 3, outer at most 6
    rng = np.random.default_rng(18)
    xy = np.column_stack([rng.permutation(18), rng.permutation(18)])
    st = _build(xy, 3)
    assert len(st) > 1
    _check_levels(xy, st, 3)


def test_chain_k1():
    xy = np.array([[0, 0], [1, 1], [2, 2], [3, 3]])
    st = _build(xy, 1)
    _check_levels(xy, st, 1)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 40), st.integers(1, 6), st.integers(0, 2**31))
def test_random_staircases(n, k, seed):
    rng = np.random.default_rng(seed)
    xy = np.column_stack([rng.permutation(n), rng.permutation(n)])
    st = _build(xy, k)
    st.check()
    _check_levels(xy, st, k)


def test_splice_identity():
    st = Staircase(1, 10, [(2, 10), (5, 6), (10, 1)])
    assert splice(st, 1, 1, []).outer == st.outer


def test_splice_merges_three_corners():
    st = Staircase(1, 10, [(1, 10), (3, 7), (6, 4), (10, 0)])
    out = splice(st, 1, 3, [(6, 7)])
    assert out.outer == [(1, 10), (6, 7), (10, 0)]


def test_splice_rejects_non_monotone():
    st = Staircase(1, 10, [(1, 10), (3, 7), (6, 4), (10, 0)])
    with pytest.raises(AssertionError):
        splice(st, 1, 2, [(7, 7)])
    with pytest.raises(AssertionError):
        splice(st, 1, 2, [(2, 5)])  # does not dominate (3, 7)
