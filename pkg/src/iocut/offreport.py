"""Offline 3-D dominance reporting over a ladder of shallow cuttings.

Queries are tried against the finest level first. A query some cell contains
(shallow) is answered from that cell's conflict list; a query no cell
contains (deep) moves on to the next coarser level. The coarsest level is a
single cell holding everything, so every query resolves there at the latest.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .cutting3d import CuttingParams, build_hierarchy
from .extsort import sort_io
from .findany import offline_find_any
from .geometry import C_LEN, C_OFF, Cutting
from .gridstruct import GridParams, GridTree
from .iomodel import ExtSequence


def last_level(N: int, M: int, B: int, c_mem: int = 10) -> int:
    """Finest level: conflict lists (<= 10 k) must fit in memory."""
    lg = math.ceil(math.log(max(N / B, 2.0)) / math.log(M / B))
    return max(1, min(N, max(M // c_mem, lg)))


@dataclass
class ReportStats:
    build_io: int = 0
    trees_built: int = 0
    find_any_io: int = 0
    resolved_at: list[int] = field(default_factory=list)  # queries per level
    fallback: int = 0


class ReportLevels:
    """Cuttings ``levels[0]`` (k = N) down to ``levels[-1]`` (k = k_last)."""

    def __init__(self, P: ExtSequence, params: CuttingParams | None = None,
                 grid: GridParams | None = None, lazy: bool = True):
        s = P.session
        self.session = s
        self.P = P
        self.N = len(P)
        self.params = params or CuttingParams()
        self.grid = grid or GridParams(gamma=self.params.gamma)
        self.k_last = last_level(self.N, s.M, s.B, self.params.c_mem)
        self.stats = ReportStats()
        self._trees: dict[tuple[int, int], GridTree] = {}
        with s.measure() as m:
            self.levels: list[Cutting] = build_hierarchy(P, self.k_last, self.params)[0]
        self.stats.build_io += m.total
        self.stats.resolved_at = [0] * len(self.levels)
        if not lazy:
            for li, cut in enumerate(self.levels):
                if self._in_memory(li):
                    continue
                for cid in range(len(cut)):
                    self.tree(li, cid)

    @property
    def ks(self) -> list[int]:
        return [c.k for c in self.levels]

    def _in_memory(self, li: int) -> bool:
        # finest level: whole conflict lists fit in memory
        return li == len(self.levels) - 1 and 10 * self.levels[li].k <= self.session.M

    def tree(self, li: int, cid: int) -> GridTree:
        key = (li, cid)
        t = self._trees.get(key)
        if t is None:
            cut = self.levels[li]
            c = cut.cell_array()[cid]
            s = self.session
            with s.measure() as m:
                pts = cut.conflicts.transfer(int(c[C_OFF]), int(c[C_LEN]))
                t = GridTree(s, pts, cut.universe, self.grid)
            self.stats.build_io += m.total
            self.stats.trees_built += 1
            self._trees[key] = t
        return t


def build_report_structure(P: ExtSequence, params: CuttingParams | None = None,
                           lazy: bool = True) -> ReportLevels:
    return ReportLevels(P, params, lazy=lazy)


@dataclass
class ReportResult:
    answers: list[np.ndarray]  # point ids per query, input order
    level: np.ndarray  # index into ``ks`` where each query resolved; -1 = fallback
    ks: list[int]
    query_io: int
    build_io_during_query: int
    K: int

    def counts(self) -> np.ndarray:
        return np.array([len(a) for a in self.answers], dtype=np.int64)


def _scan_cell(pts: np.ndarray, Q: np.ndarray) -> list[np.ndarray]:
    res = []
    for q in Q:
        m = (pts[:, 1] <= q[1]) & (pts[:, 2] <= q[2]) & (pts[:, 3] <= q[3])
        res.append(pts[m, 0])
    return res


def offline_report(R: ReportLevels, Q: ExtSequence | np.ndarray) -> ReportResult:
    s = R.session
    cfg = s.config
    if isinstance(Q, ExtSequence):
        q = Q.scan_all()
    else:
        q = np.asarray(Q)
        s.charge_reads(cfg.blocks(len(q)))
    nq = len(q)
    rows = np.empty((nq, 4), dtype=np.int64)
    rows[:, 0] = np.arange(nq)
    rows[:, 1:] = q[:, 1:4]
    answers: list[np.ndarray | None] = [None] * nq
    level = np.full(nq, -1, dtype=np.int64)
    b0 = R.stats.build_io
    K = 0
    with s.measure() as m:
        live = rows
        for li in range(len(R.levels) - 1, -1, -1):
            if len(live) == 0:
                break
            cut = R.levels[li]
            with s.measure() as mf:
                fa = offline_find_any(cut.cells, live, s)
            R.stats.find_any_io += mf.total
            live = live[np.argsort(live[:, 0], kind="stable")]
            hit = fa[:, 1] >= 0
            sh = live[hit]
            cells = fa[hit, 1]
            live = live[~hit]
            if len(sh) == 0:
                continue
            # group shallow queries by witness cell
            s.charge_reads(sort_io(len(sh), cfg) // 2)
            s.charge_writes(sort_io(len(sh), cfg) - sort_io(len(sh), cfg) // 2)
            o = np.argsort(cells, kind="stable")
            sh, cells = sh[o], cells[o]
            cids, starts = np.unique(cells, return_index=True)
            ends = list(starts[1:]) + [len(sh)]
            cell_arr = cut.cell_array()
            for cid, a, b in zip(cids, starts, ends):
                grp = sh[a:b]
                if R._in_memory(li):
                    c = cell_arr[cid]
                    pts = cut.conflicts.read(int(c[C_OFF]), int(c[C_LEN]))
                    s.charge_reads(cfg.blocks(len(grp)))
                    res = _scan_cell(pts, grp)
                else:
                    t = R.tree(li, int(cid))
                    res = [t.report(r[1:])[:, 0] for r in grp]
                for r, ids in zip(grp, res):
                    answers[r[0]] = ids
                    K += len(ids)
                level[grp[:, 0]] = li
                R.stats.resolved_at[li] += len(grp)
        if len(live):
            warnings.warn(f"{len(live)} queries deep at every level; scanning P", RuntimeWarning)
            R.stats.fallback += len(live)
            P = R.P.scan_all()
            s.charge_reads(cfg.blocks(len(live)) * max(1, -(-len(P) // max(1, s.M // 2))))
            for r, ids in zip(live, _scan_cell(P, live)):
                answers[r[0]] = ids
                K += len(ids)
        s.charge_writes(cfg.blocks(K + 2 * nq))  # (id, count) header + ids per query
    built = R.stats.build_io - b0
    return ReportResult([a if a is not None else np.empty(0, np.int64) for a in answers],
                        level, R.ks, m.total - built, built, K)


def report_bound(N: int, nq: int, K: int, M: int, B: int) -> float:
    lg = math.log(max(N / B, 1.0)) / math.log(M / B)
    return (N + nq) / B * (1 + lg) + K / B
