"""Grid trees for 3-D dominance counting, reporting and selection.

A node splits its points into ``a`` slabs per axis (``a = alpha - 1``), keeps
the ``a^3`` grid cells with their point lists and suffix counts, and recurses
on the ``3a`` axis slabs. Internally the tree answers *upward* regions
``[qx,inf) x [qy,inf) x [qz,inf)``; ``GridTree`` reflects coordinates so the
public interface speaks downward cells.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np

from .extsort import sort_io
from .iomodel import Session, blocks_touched

AXES = (1, 2, 3)


@dataclass(frozen=True)
class GridParams:
    gamma: float = 0.25
    height: int = 3

    def slabs_for(self, n: int, B: int) -> int:
        # 3^height leaves of about n / slabs^3 points each are scanned per count
        return max(2, math.ceil(max(n / B, 1.0) ** self.gamma))


class _Node:
    __slots__ = ("n", "leaf", "pts", "starts", "suffix", "cell_pts", "cell_off",
                 "children", "a")

    def __init__(self):
        self.children = None


def _slab_starts(vals_sorted: np.ndarray, a: int) -> tuple[list[int], np.ndarray]:
    """Split sorted values into a near-equal slabs; returns slab starts and sizes."""
    n = len(vals_sorted)
    bounds = [(s * n) // a for s in range(a + 1)]
    starts = [int(vals_sorted[bounds[s]]) for s in range(a)]
    return starts, np.diff(bounds)


def _slab_of(starts: list[int], q: int) -> int:
    return max(0, bisect_right(starts, q) - 1)


class _UpTree:
    def __init__(self, session: Session, pts: np.ndarray, slabs: int, height: int):
        self.s = session
        self.slabs = slabs
        self.height = height
        self.nodes = 0
        self.root = self._build(pts, 0)

    # build
    def _build(self, pts: np.ndarray, depth: int) -> _Node | None:
        s = self.s
        n = len(pts)
        if n == 0:
            return None
        self.nodes += 1
        node = _Node()
        node.n = n
        a = min(self.slabs, n)
        node.a = a
        if depth >= self.height or n <= s.B:
            node.leaf = True
            node.pts = pts
            s.charge_writes(s.config.blocks(n))
            return node
        node.leaf = False
        slab_idx = np.empty((n, 3), dtype=np.int64)
        node.starts = []
        by_axis = []
        for d, ax in enumerate(AXES):
            o = np.argsort(pts[:, ax], kind="stable")
            srt = pts[o]
            st, sizes = _slab_starts(srt[:, ax], a)
            node.starts.append(st)
            lab = np.repeat(np.arange(a), sizes)
            slab_idx[o, d] = lab
            by_axis.append((srt, np.concatenate([[0], np.cumsum(sizes)])))
        # three axis sorts, one sort into grid-cell order, slab partitions written out
        cost = 4 * sort_io(n, s.config) + 3 * s.config.blocks(n)
        s.charge_reads(cost // 2)
        s.charge_writes(cost - cost // 2)
        flat = (slab_idx[:, 0] * a + slab_idx[:, 1]) * a + slab_idx[:, 2]
        o = np.argsort(flat, kind="stable")
        node.cell_pts = pts[o]
        sizes = np.bincount(flat, minlength=a ** 3).reshape(a, a, a)
        node.cell_off = np.concatenate([[0], np.cumsum(sizes.ravel())])
        suf = np.zeros((a + 1, a + 1, a + 1), dtype=np.int64)
        suf[:a, :a, :a] = sizes[::-1, ::-1, ::-1].cumsum(0).cumsum(1).cumsum(2)[::-1, ::-1, ::-1]
        node.suffix = suf
        s.charge_writes(2 * s.config.blocks(a ** 3))
        node.children = []
        for srt, cut in by_axis:
            node.children.append([self._build(srt[cut[t]:cut[t + 1]], depth + 1)
                                  for t in range(a)])
        return node

    # queries
    def _visit(self, node: _Node) -> None:
        s = self.s
        s.charge_reads(-(-3 * node.a // s.B) + 1)

    def count(self, node: _Node | None, q: tuple[int, int, int]) -> int:
        if node is None:
            return 0
        if node.leaf:
            p = node.pts
            self.s.charge_reads(self.s.config.blocks(node.n))
            return int(((p[:, 1] >= q[0]) & (p[:, 2] >= q[1]) & (p[:, 3] >= q[2])).sum())
        self._visit(node)
        a = node.a
        xs, ys, zs = node.starts
        i, j, k = _slab_of(xs, q[0]), _slab_of(ys, q[1]), _slab_of(zs, q[2])
        ch = node.children
        total = int(node.suffix[i + 1, j + 1, k + 1])
        total += self.count(ch[0][i], q)
        if i + 1 < a:
            total += self.count(ch[1][j], (xs[i + 1], q[1], q[2]))
            if j + 1 < a:
                total += self.count(ch[2][k], (xs[i + 1], ys[j + 1], q[2]))
        return total

    def report(self, node: _Node | None, q, out: list) -> None:
        if node is None:
            return
        s = self.s
        if node.leaf:
            p = node.pts
            s.charge_reads(s.config.blocks(node.n))
            out.append(p[(p[:, 1] >= q[0]) & (p[:, 2] >= q[1]) & (p[:, 3] >= q[2])])
            return
        self._visit(node)
        a = node.a
        xs, ys, zs = node.starts
        i, j, k = _slab_of(xs, q[0]), _slab_of(ys, q[1]), _slab_of(zs, q[2])
        if k + 1 < a:
            off = node.cell_off
            for i2 in range(i + 1, a):
                for j2 in range(j + 1, a):
                    base = (i2 * a + j2) * a
                    lo, hi = int(off[base + k + 1]), int(off[base + a])
                    if hi > lo:
                        s.charge_reads(blocks_touched(lo, hi - lo, s.B))
                        out.append(node.cell_pts[lo:hi])
        ch = node.children
        self.report(ch[0][i], q, out)
        if i + 1 < a:
            self.report(ch[1][j], (xs[i + 1], q[1], q[2]), out)
            if j + 1 < a:
                self.report(ch[2][k], (xs[i + 1], ys[j + 1], q[2]), out)

    def select(self, node: _Node | None, q: list[int], d: int, kp: int) -> int | None:
        """Largest c with count(q with axis d set to c) >= kp, within this node."""
        if node is None:
            return None
        if node.leaf:
            p = node.pts
            self.s.charge_reads(self.s.config.blocks(node.n))
            m = np.ones(node.n, dtype=bool)
            for e in range(3):
                if e != d:
                    m &= p[:, 1 + e] >= q[e]
            vals = p[m, 1 + d]
            if len(vals) < kp:
                return None
            return int(-np.partition(-vals, kp - 1)[kp - 1])
        starts = node.starts[d]
        a = node.a

        def cnt(t: int) -> int:
            if t >= a:
                return 0
            qq = list(q)
            qq[d] = starts[t]
            return self.count(node, tuple(qq))

        if cnt(0) < kp:
            return None
        lo, hi = 0, a - 1  # largest t with cnt(t) >= kp
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if cnt(mid) >= kp:
                lo = mid
            else:
                hi = mid - 1
        rest = cnt(lo + 1)
        return self.select(node.children[d][lo], q, d, kp - rest)


class GridTree:
    """Downward dominance counting/reporting/selection over a point set.

    ``universe`` is the rank range of the coordinates (``+INF = universe``).
    """

    def __init__(self, session: Session, points: np.ndarray, universe: int,
                 params: GridParams | None = None):
        self.session = session
        self.U = universe
        self.params = params or GridParams()
        self.n = len(points)
        self.slabs = self.params.slabs_for(max(self.n, 1), session.B)
        self.alpha = self.slabs + 1  # planes per axis
        up = np.empty((self.n, 4), dtype=np.int32)
        up[:, 0] = points[:, 0]
        up[:, 1:] = universe - 1 - points[:, 1:4]
        self._t = _UpTree(session, up, self.slabs, self.params.height)
        self.selections = 0

    def _up(self, apex) -> tuple[int, int, int]:
        U = self.U
        return (U - 1 - int(apex[0]), U - 1 - int(apex[1]), U - 1 - int(apex[2]))

    def count(self, apex) -> int:
        return self._t.count(self._t.root, self._up(apex))

    def report(self, apex) -> np.ndarray:
        out: list = []
        self._t.report(self._t.root, self._up(apex), out)
        if not out:
            return np.empty((0, 4), dtype=np.int64)
        r = np.concatenate(out).astype(np.int64)
        r[:, 1:] = self.U - 1 - r[:, 1:]
        return r

    def select(self, apex, kp: int, axis: int) -> int | None:
        """Smallest coordinate c on ``axis`` (0,1,2) with depth >= kp; None if infeasible."""
        self.selections += 1
        q = list(self._up(apex))
        q[axis] = -1
        c = self._t.select(self._t.root, q, axis, kp)
        return None if c is None else self.U - 1 - c


def build_grid_tree(session: Session, points: np.ndarray, universe: int | None = None,
                    gamma: float = 0.25) -> GridTree:
    return GridTree(session, points, len(points) if universe is None else universe,
                    GridParams(gamma=gamma))


def additive_alpha(n: int, B: int, eps: float) -> int:
    return math.ceil((3.0 / eps) * max(n / B, 1.0) ** (1.0 / 3.0))


class AdditiveRoot:
    """Single grid node answering dominance counts with bounded additive error.

    Each axis is cut into slabs holding at most ``error // 3`` points, so the
    points missed by counting only strictly-lower grid cells number at most
    ``error``. The nominal plane count is ``additive_alpha``.
    """

    def __init__(self, session: Session, points: np.ndarray, eps: float,
                 error: float | None = None):
        s = session
        self.session = s
        self.n = n = len(points)
        self.eps = eps
        self.alpha = additive_alpha(n, s.B, eps)
        if error is None:
            error = eps * n ** (2.0 / 3.0) * s.B ** (1.0 / 3.0)
        self.error = error
        # slabs hold >= 1 point each, so a query can miss up to 3 points
        self.bound = max(error, 3.0)
        per = max(1, int(error // 3))
        self.slabs = max(1, min(n, max(self.alpha - 1, -(-n // per))))
        a = self.slabs
        self.starts = []
        lab = np.empty((n, 3), dtype=np.int64)
        for d in range(3):
            o = np.argsort(points[:, 1 + d], kind="stable")
            srt = points[o, 1 + d]
            if n:
                st, sizes = _slab_starts(srt, a)
                lab[o, d] = np.repeat(np.arange(a), sizes)
            else:
                st = []
            self.starts.append(np.asarray(st, dtype=np.int64))
        self.labels = lab
        # axis sorts + the a^3 suffix table written once
        s.charge_reads(3 * sort_io(n, s.config) // 2)
        s.charge_writes(3 * sort_io(n, s.config) - 3 * sort_io(n, s.config) // 2)
        s.charge_writes(s.config.blocks(a ** 3))

    def cell_of(self, apexes: np.ndarray) -> np.ndarray:
        """Slab index per axis of each (downward) apex; -1 below every slab."""
        apexes = np.asarray(apexes).reshape(-1, 3)
        out = np.empty(apexes.shape, dtype=np.int64)
        for d in range(3):
            out[:, d] = np.searchsorted(self.starts[d], apexes[:, d], side="right") - 1
        return out

    def strict_below(self, cells: np.ndarray) -> np.ndarray:
        """n(C): points whose slab is strictly lower than the cell on every axis."""
        cells = np.asarray(cells).reshape(-1, 3)
        res = np.zeros(len(cells), dtype=np.int64)
        if self.n == 0 or len(cells) == 0:
            return res
        a = self.slabs
        lab = self.labels
        ok = (cells >= 1).all(axis=1)
        idx = np.nonzero(ok)[0]
        if not len(idx):
            return res
        pz = np.argsort(lab[:, 2], kind="stable")
        lz = lab[pz, 2]
        qorder = idx[np.argsort(cells[idx, 2], kind="stable")]
        H = np.zeros((a + 1, a + 1), dtype=np.int64)
        ptr = 0
        cur = None
        pref = None
        for qi in qorder:
            kz = cells[qi, 2]
            if kz != cur:
                end = np.searchsorted(lz, kz, side="left")
                sel = pz[ptr:end]
                if len(sel):
                    np.add.at(H, (lab[sel, 0] + 1, lab[sel, 1] + 1), 1)
                ptr = end
                pref = H.cumsum(0).cumsum(1)
                cur = kz
            res[qi] = pref[cells[qi, 0], cells[qi, 1]]
        return res


def build_additive_root(session: Session, points: np.ndarray, eps: float,
                        error: float | None = None) -> AdditiveRoot:
    return AdditiveRoot(session, points, eps, error)


def offline_additive_count(root: AdditiveRoot, queries: np.ndarray) -> np.ndarray:
    """Per-query lower estimate n_q of the depth, in input order.

    Queries are located by sorted passes over each axis and the suffix table
    is read in cell order; only distinct table blocks are charged.
    """
    s = root.session
    cfg = s.config
    q = np.asarray(queries)
    nq = len(q)
    if nq == 0:
        return np.zeros(0, dtype=np.int64)
    apex = q[:, 1:4]
    cells = root.cell_of(apex)
    a = root.slabs
    # three locate passes (sort Q, merge with planes), sort by cell, sort back
    loc = 3 * (sort_io(nq, cfg) + cfg.blocks(a)) + 2 * sort_io(nq, cfg)
    s.charge_reads(loc // 2)
    s.charge_writes(loc - loc // 2)
    flat = (cells[:, 0] * a + cells[:, 1]) * a + cells[:, 2]
    valid = (cells >= 0).all(axis=1)
    blocks = np.unique(flat[valid] // cfg.B)
    s.charge_reads(len(blocks))
    s.charge_writes(cfg.blocks(nq))
    return root.strict_below(cells)
