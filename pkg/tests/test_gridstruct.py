import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iocut.gridstruct import (AdditiveRoot, GridParams, GridTree, additive_alpha,
                              offline_additive_count)
from iocut.iomodel import IoConfig, Session
from iocut.oracle import depths, oracle_depth

from conftest import rank_points, rank_queries


def _tree(p, m=1024, b=16, gamma=0.25):
    return GridTree(Session(IoConfig(m, b)), p, len(p), GridParams(gamma=gamma))


def test_sentinel_queries(rng):
    p = rank_points(300, "uniform", rng)
    t = _tree(p, 64, 4)
    assert t.count((300, 300, 300)) == 300
    assert t.count((-1, -1, -1)) == 0
    assert len(t.report((300, 300, 300))) == 300


@pytest.mark.parametrize("n", [1, 2, 5, 17, 64])
@pytest.mark.parametrize("dist", ["uniform", "chain", "antichain"])
def test_exhaustive_small(n, dist, rng):
    p = rank_points(n, dist, rng)
    t = _tree(p, 16, 4)
    r = np.arange(-1, n + 1)
    ap = np.array(np.meshgrid(r, r, r)).reshape(3, -1).T
    if len(ap) > 20000:
        ap = ap[rng.choice(len(ap), 20000, replace=False)]
    want = depths(p, ap)
    got = np.array([t.count(a) for a in ap])
    assert np.array_equal(got, want)


def test_random_count_and_report(rng):
    p = rank_points(4096, "uniform", rng)
    t = _tree(p)
    for q in rank_queries(1000, 4096, rng)[:, 1:]:
        rep = t.report(q)
        m = (p[:, 1] <= q[0]) & (p[:, 2] <= q[1]) & (p[:, 3] <= q[2])
        assert t.count(q) == m.sum()
        assert sorted(rep[:, 0].tolist()) == sorted(p[m, 0].tolist())
        assert np.array_equal(rep[np.argsort(rep[:, 0])], p[m][np.argsort(p[m, 0])])


def test_chain_selection():
    p = np.array([[i, i, i, i] for i in range(4)])
    t = _tree(p, 16, 4)
    assert t.select((4, 3, 3), 2, 0) == 1
    assert t.select((4, 4, 4), 4, 1) == 3
    assert t.select((4, 1, 1), 3, 0) is None


def test_selection_inverse(rng):
    n = 2048
    p = rank_points(n, "uniform", rng)
    t = _tree(p)
    done = 0
    for q in rank_queries(1000, n, rng)[:, 1:]:
        axis = int(rng.integers(3))
        full = list(q)
        full[axis] = n
        top = oracle_depth(p, full)
        if top == 0:
            continue
        kp = int(rng.integers(1, top + 1))
        c = t.select(q, kp, axis)
        probe = list(q)
        probe[axis] = c
        assert oracle_depth(p, probe) == kp
        probe[axis] = c - 1
        assert oracle_depth(p, probe) < kp
        done += 1
    assert done > 500


def test_additive_alpha_formula():
    assert additive_alpha(16, 16, 1.0) == 3
    assert additive_alpha(512 * 16, 16, 0.5) == 48


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 3000), st.sampled_from([0.1, 0.3, 0.5, 1.0]), st.integers(0, 2**31))
def test_additive_bound(n, eps, seed):
    rng = np.random.default_rng(seed)
    p = rank_points(n, "uniform", rng)
    s = Session(IoConfig(256, 8))
    root = AdditiveRoot(s, p, eps)
    q = rank_queries(300, n, rng)
    q[0, 1:] = n
    q[1, 1:] = -1
    nq = offline_additive_count(root, q)
    d = depths(p, q[:, 1:])
    assert (nq <= d).all()
    assert (d - nq <= root.bound).all()
    assert nq[1] == 0


def test_additive_corner_cell(rng):
    n = 1000
    p = rank_points(n, "uniform", rng)
    root = AdditiveRoot(Session(IoConfig(256, 8)), p, 0.5)
    top = root.cell_of(np.array([[n, n, n]]))
    assert (top == root.slabs - 1).all()
    lab = root.labels
    strict = int((lab < root.slabs - 1).all(axis=1).sum())
    assert root.strict_below(top)[0] == strict
