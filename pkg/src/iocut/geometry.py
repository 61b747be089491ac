"""Points, apexes, cells and rank-space reduction.

Points are integer rows ``[id, x, y, z]``. A cell is the closed downward box
``(-inf, x] x (-inf, y] x (-inf, z]`` named by its apex. Rank space uses the
sentinels ``+INF = N`` and ``-INF = -1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .iomodel import ExtSequence

ID, X, Y, Z = 0, 1, 2, 3
POINT_WIDTH = 4

# cell record layout
C_ID, C_X, C_Y, C_Z, C_CRE, C_EXP, C_PARENT, C_OFF, C_LEN, C_XLO = range(10)
CELL_WIDTH = 10


def pos_inf(n: int) -> int:
    return n


NEG_INF = -1


@dataclass(frozen=True)
class Apex:
    x: int
    y: int
    z: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.x, self.y, self.z)


def contains(apex, p) -> bool:
    """Closed containment of point/apex ``p`` in the cell of ``apex``."""
    a = apex.as_tuple() if isinstance(apex, Apex) else tuple(apex)
    q = p.as_tuple() if isinstance(p, Apex) else tuple(p)
    return q[0] <= a[0] and q[1] <= a[1] and q[2] <= a[2]


def dominated_mask(points: np.ndarray, apex) -> np.ndarray:
    x, y, z = (int(v) for v in apex)
    return (points[:, X] <= x) & (points[:, Y] <= y) & (points[:, Z] <= z)


@dataclass
class AxisMaps:
    """Sorted raw coordinates per axis; maps raw query values to ranks."""
    sorted_coords: tuple[np.ndarray, np.ndarray, np.ndarray]

    def to_rank(self, axis: int, values) -> np.ndarray:
        """Largest rank whose raw coordinate is <= value; -1 below all points."""
        s = self.sorted_coords[axis]
        return np.searchsorted(s, np.asarray(values), side="right") - 1

    def queries(self, raw: np.ndarray, ids=None) -> np.ndarray:
        raw = np.asarray(raw)
        out = np.empty((len(raw), 4), dtype=np.int64)
        out[:, 0] = np.arange(len(raw)) if ids is None else ids
        for a in range(3):
            out[:, 1 + a] = self.to_rank(a, raw[:, a])
        return out


def rank_space_reduce(raw: np.ndarray, ids=None) -> tuple[np.ndarray, AxisMaps]:
    """Replace coordinates by distinct ranks 0..N-1, ties broken by id."""
    raw = np.asarray(raw)
    n = len(raw)
    ids = np.arange(n) if ids is None else np.asarray(ids)
    pts = np.empty((n, 4), dtype=np.int64)
    pts[:, ID] = ids
    sorted_axes = []
    for a in range(3):
        order = np.lexsort((ids, raw[:, a]))
        pts[order, 1 + a] = np.arange(n)
        sorted_axes.append(raw[order, a])
    return pts, AxisMaps(tuple(sorted_axes))


@dataclass
class Cutting:
    """A k-level shallow cutting: cell records plus concatenated conflict lists."""
    k: int
    n: int
    cells: ExtSequence  # CELL_WIDTH records
    conflicts: ExtSequence  # point records, runs addressed by (C_OFF, C_LEN)
    meta: dict = field(default_factory=dict)
    universe: int = -1  # rank of +INF; defaults to n

    def __post_init__(self) -> None:
        if self.universe < 0:
            self.universe = self.n

    def __len__(self) -> int:
        return len(self.cells)

    def cell_array(self) -> np.ndarray:
        return self.cells.peek()

    def apexes(self) -> np.ndarray:
        return self.cells.peek()[:, C_X:C_Z + 1]

    def conflict_of(self, i: int) -> np.ndarray:
        c = self.cells.peek()[i]
        return self.conflicts.peek()[c[C_OFF]:c[C_OFF] + c[C_LEN]]

    def max_conflict(self) -> int:
        c = self.cells.peek()
        return int(c[:, C_LEN].max()) if len(c) else 0

    def dump(self) -> str:
        lines = [f"k={self.k} n={self.n} cells={len(self)}"]
        for c in self.cells.peek():
            lines.append(f"{c[C_ID]} apex=({c[C_X]},{c[C_Y]},{c[C_Z]}) "
                         f"cre={c[C_CRE]} exp={c[C_EXP]} size={c[C_LEN]}")
        return "\n".join(lines)
