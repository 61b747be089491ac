"""Offline (1 - eps)-approximate dominance counting.

Each node cuts its point set at level L, keeps an additive-error grid over
the whole set, and has one child per cutting cell built on that cell's
conflict list. A query no cell contains has depth above L, so the additive
estimate (error at most eps * L) is within a factor (1 - eps). A query some
cell contains is sent to that cell's child. Small nodes count exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cutting3d import CuttingParams, build_cutting
from .extsort import sort_io
from .findany import offline_find_any
from .geometry import C_LEN, C_OFF, Cutting
from .gridstruct import AdditiveRoot, offline_additive_count
from .iomodel import ExtSequence


@dataclass(frozen=True)
class ApproxParams:
    eps: float = 0.1
    shrink: int = 16  # recurse only while L <= n // shrink (children <= 10n/16)
    lazy: bool = True  # build a child only when a query is routed to it
    cutting: CuttingParams = CuttingParams(enforce_budget=False)


def node_level(n: int, B: int) -> int:
    return math.ceil(n ** (2.0 / 3.0) * B ** (1.0 / 3.0))


def is_leaf(n: int, M: int, B: int, shrink: int) -> bool:
    return n <= M or node_level(n, B) > n // shrink


@dataclass
class ApproxStats:
    nodes: int = 0
    leaves: int = 0
    build_io: int = 0
    max_depth: int = 0
    deep_answers: int = 0
    leaf_answers: int = 0


class ApproxNode:
    def __init__(self, tree: "ApproxTree", points: ExtSequence, depth: int):
        self.tree = tree
        self.points = points
        self.n = len(points)
        self.depth = depth
        self.children: dict[int, ApproxNode] = {}
        self.cutting: Cutting | None = None
        self.root: AdditiveRoot | None = None
        s = points.session
        p = tree.params
        st = tree.stats
        st.nodes += 1
        st.max_depth = max(st.max_depth, depth)
        self.level = node_level(self.n, s.B)
        self.leaf = is_leaf(self.n, s.M, s.B, p.shrink)
        if self.leaf:
            st.leaves += 1
            return
        with s.measure() as m:
            self.cutting = build_cutting(points, self.level, p.cutting, tree.universe)
            self.root = AdditiveRoot(s, points.scan_all(), p.eps, error=p.eps * self.level)
        st.build_io += m.total
        if not p.lazy:
            for cid in range(len(self.cutting)):
                self.child(cid)

    def child(self, cid: int) -> "ApproxNode":
        ch = self.children.get(cid)
        if ch is None:
            c = self.cutting.cell_array()[cid]
            s = self.points.session
            with s.measure() as m:
                pts = self.cutting.conflicts.transfer(int(c[C_OFF]), int(c[C_LEN]))
                seq = s.store(pts, "approx-node")
            self.tree.stats.build_io += m.total
            ch = ApproxNode(self.tree, seq, self.depth + 1)
            self.children[cid] = ch
        return ch

    def query(self, Q: np.ndarray, out: np.ndarray) -> None:
        """Fill ``out[row]`` for query rows ``[row, x, y, z]``."""
        if len(Q) == 0:
            return
        s = self.points.session
        cfg = s.config
        if self.leaf:
            self._exact(Q, out)
            return
        fa = offline_find_any(self.cutting.cells, Q, s)
        cell = fa[:, 1]
        order = np.argsort(Q[:, 0], kind="stable")
        Qs = Q[order]  # aligned with fa, which is sorted by query row
        deep = cell < 0
        if deep.any():
            out[Qs[deep, 0]] = offline_additive_count(self.root, Qs[deep])
            self.tree.stats.deep_answers += int(deep.sum())
        sh = np.nonzero(~deep)[0]
        if len(sh) == 0:
            return
        # route shallow queries to their cells: one sort by cell id, then a scan
        s.charge_reads(sort_io(len(sh), cfg) // 2 + cfg.blocks(len(sh)))
        s.charge_writes(sort_io(len(sh), cfg) - sort_io(len(sh), cfg) // 2)
        g = sh[np.argsort(cell[sh], kind="stable")]
        cids, starts = np.unique(cell[g], return_index=True)
        ends = list(starts[1:]) + [len(g)]
        for cid, a, b in zip(cids, starts, ends):
            self.child(int(cid)).query(Qs[g[a:b]], out)

    def _exact(self, Q: np.ndarray, out: np.ndarray) -> None:
        # block nested loop: one pass over the queries per memory load of points
        s = self.points.session
        cfg = s.config
        chunk = max(1, s.M - 2 * s.B)  # one block each for query input and output
        acc = np.zeros(len(Q), dtype=np.int64)
        for lo in range(0, self.n, chunk):
            pts = self.points.read(lo, min(chunk, self.n - lo))
            s.charge_reads(cfg.blocks(len(Q)))
            s.charge_writes(cfg.blocks(len(Q)))
            for a in range(0, len(Q), 256):
                q = Q[a:a + 256]
                m = (pts[None, :, 1] <= q[:, 1:2]) & (pts[None, :, 2] <= q[:, 2:3])
                m &= pts[None, :, 3] <= q[:, 3:4]
                acc[a:a + 256] += m.sum(axis=1)
        out[Q[:, 0]] = acc
        self.tree.stats.leaf_answers += len(Q)


class ApproxTree:
    def __init__(self, P: ExtSequence, params: ApproxParams | None = None,
                 universe: int | None = None):
        self.params = params or ApproxParams()
        self.session = P.session
        self.universe = len(P) if universe is None else universe
        self.stats = ApproxStats()
        self.root = ApproxNode(self, P, 0)


def build_approx(P: ExtSequence, eps: float = 0.1, params: ApproxParams | None = None) -> ApproxTree:
    if params is None:
        params = ApproxParams(eps=eps)
    return ApproxTree(P, params)


@dataclass
class ApproxResult:
    values: np.ndarray  # aligned with the input query order
    query_io: int
    build_io_during_query: int
    stats: ApproxStats = field(default_factory=ApproxStats)


def offline_approx_count(tree: ApproxTree, Q: ExtSequence | np.ndarray) -> ApproxResult:
    """Approximate depths; query-phase I/O excludes lazily built nodes."""
    s = tree.session
    if isinstance(Q, ExtSequence):
        q = Q.scan_all()
    else:
        q = np.asarray(Q)
        s.charge_reads(s.config.blocks(len(q)))
    rows = np.empty((len(q), 4), dtype=np.int64)
    rows[:, 0] = np.arange(len(q))
    rows[:, 1:] = q[:, 1:4]
    out = np.zeros(len(q), dtype=np.int64)
    b0 = tree.stats.build_io
    with s.measure() as m:
        tree.root.query(rows, out)
    built = tree.stats.build_io - b0
    return ApproxResult(out, m.total - built, built, tree.stats)
