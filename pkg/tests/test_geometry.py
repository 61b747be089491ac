import numpy as np
import pytest

from iocut.geometry import Apex, contains, dominated_mask, pos_inf, rank_space_reduce


def test_ties_broken_by_id():
    pts, _ = rank_space_reduce(np.array([[5.0, 5.0, 5.0], [5.0, 1.0, 2.0]]))
    assert pts[:, 1].tolist() == [0, 1]
    assert pts[:, 2].tolist() == [1, 0]


def test_distinct_integers():
    pts, _ = rank_space_reduce(np.array([[1, 1, 1], [2, 2, 2]]))
    assert pts[:, 1:].tolist() == [[0, 0, 0], [1, 1, 1]]


def test_query_below_everything():
    _, maps = rank_space_reduce(np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]))
    q = maps.queries(np.array([[0.5, 3.0, 3.0], [2.0, 2.0, 2.0]]))
    assert q[0, 1] == -1
    assert q[1, 1:].tolist() == [1, 1, 1]


@pytest.mark.parametrize("p,expected", [((3, 3, 3), True), ((4, 3, 3), False)])
def test_contains_closed(p, expected):
    assert contains(Apex(3, 3, 3), p) is expected


def test_universal_cell_contains_everything():
    inf = pos_inf(10)
    assert all(contains((inf, inf, inf), tuple(p)) for p in np.random.default_rng(0).integers(-1, 10, (50, 3)))


def test_rank_query_depth_matches_raw(rng):
    raw = rng.integers(0, 20, (200, 3)).astype(float)
    pts, maps = rank_space_reduce(raw)
    qraw = rng.integers(-1, 21, (100, 3)).astype(float)
    q = maps.queries(qraw)
    for r, qr in zip(q, qraw):
        raw_cnt = int(((raw <= qr).all(axis=1)).sum())
        assert int(dominated_mask(pts, r[1:]).sum()) == raw_cnt
