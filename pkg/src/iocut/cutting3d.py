"""k-level shallow cuttings for 3-D dominance ranges.

The construction sweeps a plane from z = +INF downwards and maintains a 2-D
staircase of the points below the plane. When an inner corner's depth drops
to k the staircase is patched locally and every new outer corner becomes a
3-D cell. Stage i of the hierarchy answers all of its selection queries on
grid trees built over the conflict lists of the active stage-(i-1) cells;
levels below ``M / c_mem`` are obtained by refining each base cell in memory.

Cell activity: a cell created at sweep position ``cre`` and removed while
processing position ``exp`` is on the staircase for ``exp < z <= cre``.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .extsort import sort_io
from .geometry import (C_CRE, C_EXP, C_ID, C_LEN, C_OFF, C_PARENT, C_X, C_XLO, C_Y,
                       C_Z, CELL_WIDTH, Cutting)
from .gridstruct import GridParams, GridTree
from .iomodel import ExternalOrderedMap, ExtSequence, Session


class BudgetError(AssertionError):
    pass


@dataclass(frozen=True)
class CuttingParams:
    delta: float = 0.5
    inner_mult: int = 9  # inner corners are re-established at depth 9k
    outer_mult: int = 10  # outer corners hold at most 10k points
    c_mem: int = 10  # small-k threshold M // c_mem
    budget: float = 20.0  # per-stage cap on selections and queue ops, times N/k_i
    enforce_budget: bool = True
    gamma: float = 0.25
    check: bool = False  # cross-check every selection against a full scan


@dataclass
class StageStats:
    level: int
    parent_level: int
    cells: int
    selections: int
    pq_ops: int
    index_ops: int
    io: int
    max_conflict: int
    lookups_checked: int = 0

    def budget_ratio(self, n: int) -> float:
        return max(self.selections, self.pq_ops) * self.level / max(n, 1)


# selection backends -------------------------------------------------------

class _MemBackend:
    """Selections by scanning an in-memory point array."""

    def __init__(self, pts: np.ndarray, U: int):
        self.pts = pts
        self.px, self.py, self.pz = pts[:, 1], pts[:, 2], pts[:, 3]
        self.U = U
        self.selections = 0

    def advance(self, z: int) -> None:
        pass

    def xsel(self, Y: int, z: int, cap: int) -> tuple[int, int]:
        """Largest X with D(X, Y, z) <= cap."""
        self.selections += 1
        xs = self.px[(self.py <= Y) & (self.pz <= z)]
        if len(xs) <= cap:
            return self.U, -1
        return int(np.partition(xs, cap)[cap]) - 1, -1

    def ysel(self, x: int, z: int, t: int) -> int:
        """Smallest y with D(x, y, z) >= t."""
        self.selections += 1
        ys = self.py[(self.px <= x) & (self.pz <= z)]
        assert len(ys) >= t
        return int(np.partition(ys, t - 1)[t - 1])

    def at_least(self, x: int, y: int, z: int, t: int) -> bool:
        self.selections += 1
        return int(((self.px <= x) & (self.py <= y) & (self.pz <= z)).sum()) >= t

    def zsel(self, x: int, y: int, t: int) -> int | None:
        """Smallest z with D(x, y, z) >= t."""
        self.selections += 1
        zs = self.pz[(self.px <= x) & (self.py <= y)]
        if len(zs) < t:
            return None
        return int(np.partition(zs, t - 1)[t - 1])

    def report(self, apex, parent: int) -> np.ndarray:
        x, y, z = apex
        return self.pts[(self.px <= x) & (self.py <= y) & (self.pz <= z)]


class _ParentBackend:
    """Routes selections to grid trees on the active parent cells.

    The active parent cells at any sweep position form the parent staircase,
    so the y-successor (smallest apex y >= y) is also the rightmost parent
    reaching height y, and the x-successor is the highest parent reaching
    column x. Parent activity is replayed from the (cre, exp) lists.
    """

    def __init__(self, session: Session, parent: Cutting, U: int, gamma: float):
        s = session
        self.s = s
        self.parent = parent
        self.U = U
        self.gparams = GridParams(gamma=gamma)
        cells = parent.cells.scan_all()
        self.cells = cells
        live = cells[cells[:, C_EXP] < cells[:, C_CRE]]
        self.ins = live[np.lexsort((live[:, C_ID], -live[:, C_CRE]))]
        self.dels = live[np.lexsort((live[:, C_ID], -live[:, C_EXP]))]
        # two sorts of the parent cell list, then one pass over each
        s.charge_reads(sort_io(len(live), s.config) + 2 * s.config.blocks(len(live)))
        s.charge_writes(sort_io(len(live), s.config))
        self.ip = 0
        self.dp = 0
        self.by_y = ExternalOrderedMap(s)
        self.by_x = ExternalOrderedMap(s)
        self.trees: dict[int, GridTree] = {}
        self.selections = 0
        self.trees_built = 0

    @property
    def index_ops(self) -> int:
        return self.by_x.ops + self.by_y.ops

    def advance(self, z: int) -> None:
        ins, dels = self.ins, self.dels
        while self.ip < len(ins) and ins[self.ip, C_CRE] >= z:
            c = ins[self.ip]
            self.by_y.insert((int(c[C_Y]), int(c[C_X]), int(c[C_ID])))
            self.by_x.insert((int(c[C_X]), int(c[C_Y]), int(c[C_ID])))
            self.ip += 1
        while self.dp < len(dels) and dels[self.dp, C_EXP] >= z:
            c = dels[self.dp]
            self.by_y.delete((int(c[C_Y]), int(c[C_X]), int(c[C_ID])))
            self.by_x.delete((int(c[C_X]), int(c[C_Y]), int(c[C_ID])))
            self.trees.pop(int(c[C_ID]), None)
            self.dp += 1

    def _tree(self, cid: int) -> GridTree:
        t = self.trees.get(cid)
        if t is None:
            c = self.cells[cid]
            pts = self.parent.conflicts.transfer(int(c[C_OFF]), int(c[C_LEN]))
            t = GridTree(self.s, pts, self.U, self.gparams)
            self.trees[cid] = t
            self.trees_built += 1
        return t

    def y_successor(self, y: int) -> tuple[int, int, int]:
        key = self.by_y.successor((y, -2, -2))
        assert key is not None, f"no active parent reaches y={y}"
        Y, X, cid = key
        return X, Y, cid

    def x_successor(self, x: int) -> tuple[int, int, int]:
        key = self.by_x.successor((x, -2, -2))
        assert key is not None, f"no active parent reaches x={x}"
        return key

    def xsel(self, Y: int, z: int, cap: int) -> tuple[int, int]:
        self.selections += 1
        Xp, _, cid = self.y_successor(Y)
        x = self._tree(cid).select((Xp, Y, z), cap + 1, 0)
        return (Xp if x is None else x - 1), cid

    def ysel(self, x: int, z: int, t: int) -> int:
        self.selections += 1
        _, Yp, cid = self.x_successor(x)
        y = self._tree(cid).select((x, Yp, z), t, 1)
        assert y is not None
        return y

    def at_least(self, x: int, y: int, z: int, t: int) -> bool:
        self.selections += 1
        Xp, _, cid = self.y_successor(y)
        if Xp < x:
            return True  # outside the parent staircase: deeper than the parent level
        return self._tree(cid).count((x, y, z)) >= t

    def zsel(self, x: int, y: int, t: int) -> int | None:
        self.selections += 1
        Xp, _, cid = self.y_successor(y)
        assert Xp >= x
        return self._tree(cid).select((x, y, 0), t, 2)

    def report(self, apex, parent: int) -> np.ndarray:
        return self._tree(parent).report(apex)


class _Checked:
    """Wraps a backend and compares every answer with a full in-memory scan."""

    def __init__(self, be, ref: _MemBackend):
        self.be = be
        self.ref = ref
        self.checked = 0

    def __getattr__(self, name):
        return getattr(self.be, name)

    def advance(self, z):
        self.be.advance(z)

    def xsel(self, Y, z, cap):
        a = self.be.xsel(Y, z, cap)
        assert a[0] == self.ref.xsel(Y, z, cap)[0], ("xsel", Y, z, cap)
        self.checked += 1
        return a

    def ysel(self, x, z, t):
        a = self.be.ysel(x, z, t)
        assert a == self.ref.ysel(x, z, t), ("ysel", x, z, t)
        self.checked += 1
        return a

    def at_least(self, x, y, z, t):
        a = self.be.at_least(x, y, z, t)
        assert a == self.ref.at_least(x, y, z, t), ("at_least", x, y, z, t)
        self.checked += 1
        return a

    def zsel(self, x, y, t):
        a = self.be.zsel(x, y, t)
        assert a == self.ref.zsel(x, y, t), ("zsel", x, y, t)
        self.checked += 1
        return a

    def report(self, apex, parent):
        a = self.be.report(apex, parent)
        want = self.ref.report(apex, parent)
        assert np.array_equal(np.sort(a[:, 0]), np.sort(want[:, 0])), ("report", apex)
        return a


# the sweep ----------------------------------------------------------------

class _Sweep:
    def __init__(self, be, k: int, U: int, params: CuttingParams, pq: ExternalOrderedMap,
                 z_top: int, z_stop: int,
                 on_create: Callable[[int, int, int, int, int], None] | None = None,
                 check_pts: np.ndarray | None = None):
        self.be = be
        self.k = k
        self.U = U
        self.T = params.inner_mult * k
        self.cap = params.outer_mult * k
        self.pq = pq
        self.z_top = z_top
        self.z_stop = z_stop
        self.on_create = on_create
        self.check_pts = check_pts
        self.Xs: list[int] = []
        self.Ys: list[int] = []
        self.Cs: list[int] = []
        # cell rows: [X, Y, cre, exp, parent, xlo]
        self.cells: list[list[int]] = []
        self.seq = 0
        self.events = 0

    def _cell(self, X: int, Y: int, z: int, parent: int, xlo: int) -> int:
        idx = len(self.cells)
        self.cells.append([X, Y, z, self.z_stop, parent, xlo])
        if self.on_create is not None:
            self.on_create(idx, X, Y, z, parent)
        return idx

    def _push(self, pos: int) -> None:
        """Queue the expiry of the notch right of staircase position ``pos``."""
        nx, ny = self.Xs[pos] + 1, self.Ys[pos + 1] + 1
        t = self.be.zsel(nx, ny, self.k + 1)
        assert t is not None
        self.seq += 1
        self.pq.insert((t - 1, self.seq, self.Cs[pos], nx, ny))

    def run(self) -> None:
        self.be.advance(self.z_top)
        self._initial(self.z_top)
        pq = self.pq
        while len(pq):
            z = pq.peek_max()[0]
            if z <= self.z_stop:
                break
            _, _, left, nx, ny = pq.pop_max()
            pos = bisect_left(self.Xs, nx - 1)
            if (pos >= len(self.Xs) - 1 or self.Xs[pos] != nx - 1 or self.Cs[pos] != left
                    or self.Ys[pos + 1] != ny - 1):
                continue  # stale: the notch was patched away
            self.events += 1
            self.be.advance(z)
            self._patch(pos, z)
            if self.check_pts is not None:
                nxt = pq.peek_max()
                if nxt is None or nxt[0] < z:
                    self._check(z)

    def _initial(self, z: int) -> None:
        U = self.U
        cur_Y, xlo = U, -1
        guard = 0
        while True:
            X, par = self.be.xsel(cur_Y, z, self.cap)
            c = self._cell(X, cur_Y, z, par, xlo)
            self.Xs.append(X)
            self.Ys.append(cur_Y)
            self.Cs.append(c)
            if X >= U:
                break
            xlo = X
            cur_Y = self.be.ysel(X + 1, z, self.T + 1) - 1
            guard += 1
            assert guard <= U + 2
        for p in range(len(self.Xs) - 1):
            self._push(p)

    def _patch(self, i: int, z: int) -> None:
        U = self.U
        Xs, Ys, Cs = self.Xs, self.Ys, self.Cs
        cur_Y = Ys[i]
        j = i
        new: list[tuple[int, int, int]] = []
        while True:
            X, par = self.be.xsel(cur_Y, z, self.cap)
            while j < len(Xs) and Xs[j] <= X:
                j += 1
            new.append((X, cur_Y, par))
            if X >= U:
                break
            assert j < len(Xs)
            if self.be.at_least(X + 1, Ys[j] + 1, z, self.T + 1):
                break
            cur_Y = self.be.ysel(X + 1, z, self.T + 1) - 1
            assert len(new) <= U + 2
        for c in Cs[i:j]:
            self.cells[c][3] = z
        xlo = Xs[i - 1] if i > 0 else -1
        ids = []
        for X, Y, par in new:
            ids.append(self._cell(X, Y, z, par, xlo))
            xlo = X
        Xs[i:j] = [t[0] for t in new]
        Ys[i:j] = [t[1] for t in new]
        Cs[i:j] = ids
        last = i + len(new) - 1
        for p in range(i, min(last + 1, len(Xs) - 1)):
            self._push(p)

    def _check(self, z: int) -> None:
        """Slow invariant check of the live staircase at sweep position z."""
        p = self.check_pts
        p = p[p[:, 3] <= z]
        for a, b in zip(self.Xs, self.Xs[1:]):
            assert a < b
        for a, b in zip(self.Ys, self.Ys[1:]):
            assert a > b
        for X, Y in zip(self.Xs, self.Ys):
            assert ((p[:, 1] <= X) & (p[:, 2] <= Y)).sum() <= self.cap
        for q in range(len(self.Xs) - 1):
            d = ((p[:, 1] <= self.Xs[q] + 1) & (p[:, 2] <= self.Ys[q + 1] + 1)).sum()
            assert self.k + 1 <= d <= self.cap + 1, (d, self.k)


# assembling cuttings ------------------------------------------------------

def _records(sweep: _Sweep, conf: dict[int, tuple[int, int]] | None) -> np.ndarray:
    rows = np.asarray(sweep.cells, dtype=np.int64).reshape(-1, 6)
    keep = rows[:, 3] < rows[:, 2]  # drop cells removed in the step that created them
    idx = np.nonzero(keep)[0]
    out = np.zeros((len(idx), CELL_WIDTH), dtype=np.int64)
    out[:, C_X] = rows[idx, 0]
    out[:, C_Y] = rows[idx, 1]
    out[:, C_Z] = rows[idx, 2]
    out[:, C_CRE] = rows[idx, 2]
    out[:, C_EXP] = rows[idx, 3]
    out[:, C_PARENT] = rows[idx, 4]
    out[:, C_XLO] = rows[idx, 5]
    if conf is not None:
        out[:, C_OFF] = [conf[i][0] for i in idx]
        out[:, C_LEN] = [conf[i][1] for i in idx]
    _, first = np.unique(out[:, C_X:C_Z + 1], axis=0, return_index=True)
    out = out[np.sort(first)]
    out[:, C_ID] = np.arange(len(out))
    return out


def universal_cutting(P: ExtSequence, k: int, U: int | None = None) -> Cutting:
    s = P.session
    U = len(P) if U is None else U
    rec = np.array([[0, U, U, U, U, -1, -1, 0, len(P), -1]], dtype=np.int64)
    return Cutting(k=k, n=len(P), cells=s.store(rec, "cells"), conflicts=P, universe=U)


def ladder(N: int, k: int, B: int, delta: float = 0.5) -> list[int]:
    """Levels k_0 = N > k_1 > ... > k with 10 k_i + 1 <= k_{i-1}."""
    if 10 * k >= N:
        return [N]
    levels = [N]
    i = 1
    while levels[-1] != k:
        prev = levels[-1]
        cap = (prev - 1) // 10
        cand = math.ceil(B * max(N / B, 1.0) ** (delta ** i))
        if cand <= k or cap < 10 * k + 1:
            nxt = k
        else:
            nxt = min(max(cand, 10 * k + 1), cap)
        levels.append(nxt)
        i += 1
    return levels


def run_stage(P: ExtSequence, parent: Cutting, k: int, params: CuttingParams | None = None,
              U: int | None = None) -> tuple[Cutting, StageStats]:
    params = params or CuttingParams()
    s = P.session
    N = len(P)
    U = N if U is None else U
    with s.measure() as m:
        be = _ParentBackend(s, parent, U, params.gamma)
        front = _Checked(be, _MemBackend(P.peek(), U)) if params.check else be
        pq = ExternalOrderedMap(s)
        writer = s.writer(4, "conflicts")
        conf: dict[int, tuple[int, int]] = {}

        def on_create(idx, X, Y, z, par):
            pts = front.report((X, Y, z), par)
            conf[idx] = (writer.count, len(pts))
            writer.extend(pts)

        sw = _Sweep(front, k, U, params, pq, U, -1, on_create,
                    check_pts=P.peek() if params.check else None)
        sw.run()
        conflicts = writer.close()
        rec = _records(sw, conf)
        cut = Cutting(k=k, n=N, cells=s.store(rec, "cells"), conflicts=conflicts, universe=U)
    st = StageStats(level=k, parent_level=parent.k, cells=len(cut), selections=be.selections,
                    pq_ops=pq.ops, index_ops=be.index_ops, io=m.total,
                    max_conflict=cut.max_conflict(),
                    lookups_checked=front.checked if params.check else 0)
    if params.enforce_budget:
        lim = params.budget * N / k
        if st.selections > lim or st.pq_ops > lim:
            raise BudgetError(f"stage k={k}: selections={st.selections} "
                              f"pq_ops={st.pq_ops} exceed {lim:.0f}")
    return cut, st


def build_hierarchy(P: ExtSequence, k: int, params: CuttingParams | None = None,
                    universe: int | None = None) -> tuple[list[Cutting], list[StageStats]]:
    params = params or CuttingParams()
    N = len(P)
    U = N if universe is None else universe
    levels = ladder(N, k, P.session.B, params.delta)
    cuts = [universal_cutting(P, levels[0] if len(levels) > 1 else k, U)]
    stats: list[StageStats] = []
    for lv in levels[1:]:
        cut, st = run_stage(P, cuts[-1], lv, params, U)
        cuts.append(cut)
        stats.append(st)
    return cuts, stats


def inmem_cutting(points: np.ndarray, k: int, U: int, params: CuttingParams | None = None,
                  z_top: int | None = None, z_stop: int = -1, session: Session | None = None,
                  check: bool = False) -> tuple[np.ndarray, list[np.ndarray]]:
    """Cut an in-memory point set with no simulated I/O.

    Returns cell records (without conflict offsets) and the conflict arrays.
    """
    params = params or CuttingParams()
    be = _MemBackend(points, U)
    pq = ExternalOrderedMap(session, charged=False)
    sw = _Sweep(be, k, U, params, pq, U if z_top is None else z_top, z_stop,
                check_pts=points if check else None)
    sw.run()
    rec = _records(sw, None)
    conf = [be.report(r[C_X:C_Z + 1], -1) for r in rec]
    return rec, conf


def small_k_refine(base: Cutting, k: int, params: CuttingParams | None = None,
                   U: int | None = None) -> Cutting:
    """Refine every base cell in memory to level k and take the union."""
    params = params or CuttingParams()
    cells_seq = base.cells
    s = cells_seq.session
    U = base.universe if U is None else U
    out_rows = []
    writer = s.writer(4, "conflicts")
    for c in cells_seq.scan_all():
        pts = base.conflicts.read(int(c[C_OFF]), int(c[C_LEN]))
        rec, conf = inmem_cutting(pts, k, U, params, z_top=int(c[C_CRE]),
                                  z_stop=int(c[C_EXP]))
        for r, cf in zip(rec, conf):
            if r[C_X] <= c[C_XLO]:
                continue  # queries here are owned by cells further left
            r = r.copy()
            r[C_X] = min(r[C_X], c[C_X])
            r[C_Y] = min(r[C_Y], c[C_Y])
            r[C_Z] = min(r[C_Z], c[C_Z])
            cf = cf[(cf[:, 1] <= r[C_X]) & (cf[:, 2] <= r[C_Y]) & (cf[:, 3] <= r[C_Z])]
            r[C_PARENT] = c[C_ID]
            r[C_OFF] = writer.count
            r[C_LEN] = len(cf)
            writer.extend(cf)
            out_rows.append(r)
    conflicts = writer.close()
    rec = np.asarray(out_rows, dtype=np.int64).reshape(-1, CELL_WIDTH)
    rec[:, C_ID] = np.arange(len(rec))
    return Cutting(k=k, n=base.n, cells=s.store(rec, "cells"), conflicts=conflicts,
                   universe=U)


def build_cutting(P: ExtSequence, k: int, params: CuttingParams | None = None,
                  universe: int | None = None) -> Cutting:
    """k-level shallow cutting of the rank-space points in ``P``.

    ``universe`` is the +INF rank; it defaults to ``len(P)`` and must be
    given when ``P`` is a subset of a larger rank space.
    """
    params = params or CuttingParams()
    s = P.session
    N = len(P)
    if not 1 <= k:
        raise ValueError("k must be positive")
    kb = max(1, s.M // params.c_mem)
    with s.measure() as m:
        if k >= kb or 10 * k >= N:
            cuts, stats = build_hierarchy(P, k, params, universe)
            cut = cuts[-1]
        else:
            cuts, stats = build_hierarchy(P, kb, params, universe)
            cut = small_k_refine(cuts[-1], k, params)
    cut.meta = {"stages": stats, "levels": [c.k for c in cuts], "io": m.total,
                "refined": k < kb and 10 * k < N}
    return cut
