import numpy as np
import pytest

from iocut.cutting3d import build_cutting
from iocut.geometry import Cutting
from iocut.iomodel import IoConfig, Session
from iocut.oracle import (depths, exhaustive_depth_grid, oracle_depth, oracle_report,
                          sample_shallow_apexes, validate_cutting)

from conftest import rank_points


def test_chain_of_four():
    p = np.array([[i, i + 1, i + 1, i + 1] for i in range(4)])
    assert oracle_depth(p, (4, 4, 4)) == 4
    assert sorted(oracle_report(p, (4, 4, 4))[:, 0].tolist()) == [0, 1, 2, 3]


def test_single_point_at_origin():
    p = np.array([[0, 0, 0, 0], [1, 1, 2, 3], [2, 3, 1, 2]])
    assert oracle_depth(p, (0, 0, 0)) == 1
    assert oracle_report(p, (0, 0, 0))[:, 0].tolist() == [0]


def test_vectorised_depths_agree(rng):
    p = rank_points(50, "uniform", rng)
    a = rng.integers(-1, 51, (300, 3))
    assert depths(p, a).tolist() == [oracle_depth(p, x) for x in a]


def test_depth_grid(rng):
    p = rank_points(7, "uniform", rng)
    g = exhaustive_depth_grid(p, 7)
    for x, y, z in rng.integers(-1, 7, (40, 3)):
        assert g[x + 1, y + 1, z + 1] == oracle_depth(p, (x, y, z))


def test_samples_are_shallow(rng):
    p = rank_points(300, "uniform", rng)
    a = sample_shallow_apexes(p, 5, 500, rng)
    assert (depths(p, a) <= 5).all()


def _cut(points, k, m=64, b=4):
    s = Session(IoConfig(m, b))
    return build_cutting(s.place(points), k)


def test_universal_cutting_is_valid(rng):
    p = rank_points(20, "uniform", rng)
    rep = validate_cutting(p, 20, _cut(p, 20))
    assert rep.ok and rep.cell_ratio == 1.0 and rep.conflict_ratio <= 1.0


def test_truncated_conflict_list_is_caught(rng):
    p = rank_points(40, "uniform", rng)
    cut = _cut(p, 2)
    cells = cut.cell_array().copy()
    i = int(np.argmax(cells[:, 8]))
    cells[i, 8] -= 1
    s = cut.cells.session
    bad = Cutting(cut.k, cut.n, s.place(cells), cut.conflicts)
    rep = validate_cutting(p, 2, bad)
    assert rep.mismatches and not rep.ok


def test_dropping_a_cell_is_caught(rng):
    p = rank_points(40, "uniform", rng)
    cut = _cut(p, 2)
    cells = cut.cell_array()
    s = cut.cells.session
    bad = Cutting(cut.k, cut.n, s.place(cells[1:]), cut.conflicts)
    assert validate_cutting(p, 2, bad, check_conflicts=False).violations


def test_exhaustive_limit(rng):
    p = rank_points(65, "uniform", rng)
    with pytest.raises(ValueError):
        validate_cutting(p, 65, _cut(p, 65))
