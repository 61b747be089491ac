import numpy as np
import pytest

from iocut.approxcount import (ApproxParams, build_approx, is_leaf, node_level,
                               offline_approx_count)
from iocut.iomodel import IoConfig, Session
from iocut.oracle import depths

from conftest import rank_points, rank_queries


def _run(p, q, eps, m=1024, b=16, **kw):
    s = Session(IoConfig(m, b))
    tree = build_approx(s.place(p), eps, ApproxParams(eps=eps, **kw) if kw else None)
    return tree, offline_approx_count(tree, q)


def _assert_bounds(res, p, q, eps):
    d = depths(p, q[:, 1:])
    assert (res.values <= d).all()
    assert (res.values >= (1 - eps) * d).all()


def test_small_input_is_a_leaf(rng):
    p = rank_points(200, "uniform", rng)
    q = rank_queries(50, 200, rng)
    tree, res = _run(p, q, 0.1)
    assert tree.root.leaf and tree.stats.nodes == 1
    _assert_bounds(res, p, q, 0.0)


def test_extreme_queries(rng):
    n = 20000
    p = rank_points(n, "uniform", rng)
    q = np.array([[0, -1, -1, -1], [1, n, n, n]])
    _, res = _run(p, q, 0.1)
    assert res.values[0] == 0
    assert 0.9 * n <= res.values[1] <= n


@pytest.mark.parametrize("eps", [0.1, 0.5])
@pytest.mark.parametrize("dist", ["uniform", "chain", "antichain"])
def test_relative_bound(eps, dist, rng):
    n = 20000
    p = rank_points(n, dist, rng)
    q = rank_queries(600, n, rng)
    q[:, 1:] = (q[:, 1:] * rng.random((600, 1)) ** 3).astype(np.int64)  # mix of depths
    tree, res = _run(p, q, eps, 256, 4)
    _assert_bounds(res, p, q, eps)
    assert not tree.root.leaf
    assert tree.stats.deep_answers > 0 and tree.stats.leaf_answers > 0


def test_eager_and_lazy_agree(rng):
    n = 20000
    p = rank_points(n, "uniform", rng)
    q = rank_queries(300, n, rng)
    _, a = _run(p, q, 0.2, 256, 4)
    _, b = _run(p, q, 0.2, 256, 4, lazy=False)
    assert np.array_equal(a.values, b.values)
    assert b.build_io_during_query == 0


def test_children_are_conflict_lists(rng):
    n = 20000
    p = rank_points(n, "uniform", rng)
    tree, _ = _run(p, rank_queries(200, n, rng), 0.1, 256, 4)
    root = tree.root
    assert root.children
    for cid, ch in root.children.items():
        assert np.array_equal(ch.points.peek(), root.cutting.conflict_of(cid))
        assert ch.n <= 10 * root.level


def test_recursion_depth_16_bit():
    # N -> 10 N^{2/3} B^{1/3} shrinks to a leaf within 3 levels
    n, depth = 2**16, 0
    while not is_leaf(n, 1024, 16, 16):
        n = 10 * node_level(n, 16)
        depth += 1
    assert depth <= 3
