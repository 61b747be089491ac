"""2-D shallow cuttings as monotone staircases.

A staircase is a list of outer corners ``(X_i, Y_i)`` with X strictly
increasing and Y strictly decreasing; the first has ``Y = +INF`` and the last
``X = +INF``. The union of the quadrants ``(-inf, X_i] x (-inf, Y_i]`` is the
covered region. Between ``c_i`` and ``c_{i+1}`` sits the inner corner
``(X_i + 1, Y_{i+1})``. The grid point just outside that inner corner,
``(X_i + 1, Y_{i+1} + 1)``, is the *notch*; a 2-D query escapes the staircase
only if it dominates some notch.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .extsort import SortKey, external_sort
from .iomodel import ExtSequence


@dataclass(frozen=True)
class Corner:
    kind: str  # "outer" | "inner"
    x: int
    y: int
    depth_at_build: int = -1


@dataclass
class Staircase:
    k: int
    n: int  # universe; +INF = n
    outer: list[tuple[int, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.outer)

    def inner(self) -> list[tuple[int, int]]:
        return [(self.outer[i][0] + 1, self.outer[i + 1][1]) for i in range(len(self.outer) - 1)]

    def notches(self) -> list[tuple[int, int]]:
        return [(x, y + 1) for x, y in self.inner()]

    def corners(self, points2d: np.ndarray | None = None) -> list[Corner]:
        """Alternating corner sequence; depths filled in when points are given."""
        def d(x, y):
            if points2d is None:
                return -1
            return int(((points2d[:, 0] <= x) & (points2d[:, 1] <= y)).sum())
        out = []
        inn = self.inner()
        for i, (x, y) in enumerate(self.outer):
            out.append(Corner("outer", x, y, d(x, y)))
            if i < len(inn):
                out.append(Corner("inner", *inn[i], d(*inn[i])))
        return out

    def covers(self, x: int, y: int) -> bool:
        return any(x <= X and y <= Y for X, Y in self.outer)

    def check(self) -> None:
        check_monotone(self.outer, self.n)


def check_monotone(outer: list[tuple[int, int]], n: int) -> None:
    for (x0, y0), (x1, y1) in zip(outer, outer[1:]):
        if not (x0 < x1 and y0 > y1):
            raise AssertionError(f"staircase not monotone at {(x0, y0)} -> {(x1, y1)}")
    if outer and (outer[0][1] != n or outer[-1][0] != n):
        raise AssertionError("staircase must start at y=+INF and end at x=+INF")


def build_staircase(points2d: ExtSequence, k: int, n: int | None = None,
                    inner_target: int | None = None, outer_cap: int | None = None) -> Staircase:
    """Greedy construction: one sort by x and one scan with a bounded heap.

    ``points2d`` holds records ``[id, x, y]``. Each inner corner dominates
    exactly ``inner_target`` points and each outer corner at most
    ``outer_cap`` (defaults k and 2k).
    """
    T = k if inner_target is None else inner_target
    cap = 2 * k if outer_cap is None else outer_cap
    assert 1 <= T < cap
    s = points2d.session
    N = len(points2d) if n is None else n
    s.require_memory(cap + 1)
    by_x = external_sort(points2d, SortKey((1,)))
    outer: list[tuple[int, int]] = []
    Y = N
    heap: list[int] = []  # max-heap (negated) of seen y <= Y
    for chunk in by_x.scan():
        for x, y in zip(chunk[:, 1].tolist(), chunk[:, 2].tolist()):
            if y > Y:
                continue
            heapq.heappush(heap, -y)
            if len(heap) == cap + 1:
                outer.append((x - 1, Y))
                while len(heap) > T + 1:
                    heapq.heappop(heap)
                Y = -heapq.heappop(heap) - 1
    outer.append((N, Y))
    st = Staircase(k, N, outer)
    st.check()
    return st


def splice(stair: Staircase, lo: int, hi: int, new: list[tuple[int, int]]) -> Staircase:
    """Replace outer corners ``[lo, hi)`` by ``new``.

    Every removed corner must be dominated by a new corner and the result
    must stay monotone.
    """
    removed = stair.outer[lo:hi]
    for rx, ry in removed:
        if not any(rx <= nx and ry <= ny for nx, ny in new):
            raise AssertionError(f"removed corner {(rx, ry)} not dominated by the patch")
    outer = stair.outer[:lo] + list(new) + stair.outer[hi:]
    check_monotone(outer, stair.n)
    return Staircase(stair.k, stair.n, outer)
