"""Batched offline find-any by distribution sweeping.

Cells and queries are ordered by z descending (cells first on ties), so the
cells "active" for a query are exactly those preceding it. A level splits the
y-axis into strips by quantiles of the cell y values; a query is answered by
any active cell in a strictly higher strip whose x reaches the query, and
otherwise recurses into its own strip.
"""
from __future__ import annotations

import numpy as np

from .extsort import sort_io
from .iomodel import ExtSequence, Session

NONE = -1


def _base(cells: np.ndarray, qs: np.ndarray, ans: np.ndarray, qrank: np.ndarray) -> None:
    if len(qs) == 0 or len(cells) == 0:
        return
    for s in range(0, len(qs), 256):
        q = qs[s:s + 256]
        m = (cells[None, :, 1] >= q[:, 1:2]) & (cells[None, :, 2] >= q[:, 2:3])
        m &= cells[None, :, 3] >= q[:, 3:4]
        hit = m.any(axis=1)
        first = m.argmax(axis=1)
        ans[qrank[s:s + 256][hit]] = cells[first[hit], 0]


def offline_find_any(cells: ExtSequence | np.ndarray, queries: ExtSequence | np.ndarray,
                     session: Session | None = None) -> np.ndarray:
    """Rows ``[query_id, cell_id or -1]`` sorted by query id.

    ``cells`` rows start ``[id, x, y, z, ...]``; ``queries`` rows are
    ``[id, x, y, z]``.
    """
    if isinstance(cells, ExtSequence):
        session = cells.session
        C = cells.scan_all()[:, :4].astype(np.int64)
    else:
        C = np.asarray(cells)[:, :4].astype(np.int64)
    if isinstance(queries, ExtSequence):
        session = queries.session
        Q = queries.scan_all()[:, :4].astype(np.int64)
    else:
        Q = np.asarray(queries)[:, :4].astype(np.int64)
    assert session is not None
    cfg = session.config
    nc, nq = len(C), len(Q)
    # joint sort by z desc, cells before queries, then id
    kind = np.concatenate([np.zeros(nc, np.int64), np.ones(nq, np.int64)])
    allz = np.concatenate([C[:, 3], Q[:, 3]])
    ids = np.concatenate([C[:, 0], Q[:, 0]])
    order = np.lexsort((ids, kind, -allz))
    session.charge_reads(sort_io(nc + nq, cfg) // 2)
    session.charge_writes(sort_io(nc + nq, cfg) - sort_io(nc + nq, cfg) // 2)
    pos = np.empty(nc + nq, dtype=np.int64)
    pos[order] = np.arange(nc + nq)
    cpos, qpos_global = pos[:nc], pos[nc:]
    co = np.argsort(cpos, kind="stable")
    qo = np.argsort(qpos_global, kind="stable")
    ans_by_rank = np.full(nq, NONE, dtype=np.int64)
    # answers are indexed by a query's rank in z order
    qrank = np.arange(nq)
    _Sweep(session, ans_by_rank).run(C[co], cpos[co], Q[qo], qpos_global[qo], qrank)
    out = np.empty((nq, 2), dtype=np.int64)
    out[:, 0] = Q[qo, 0]
    out[:, 1] = ans_by_rank
    o = np.argsort(out[:, 0], kind="stable")
    session.charge_reads(sort_io(nq, cfg) // 2)
    session.charge_writes(sort_io(nq, cfg) - sort_io(nq, cfg) // 2)
    return out[o]


class _Sweep:
    def __init__(self, s: Session, ans: np.ndarray):
        self.s = s
        self.ans = ans

    def run(self, cells, cpos, qs, qpos, qrank) -> None:
        s = self.s
        ans = self.ans
        if len(qs) == 0 or len(cells) == 0:
            return
        if len(cells) + len(qs) <= s.M:
            _base(cells, qs, ans, qrank)
            return
        cfg = s.config
        s.charge_reads(cfg.blocks(len(cells) + len(qs)))
        W = len(cells) + 1
        enc = (cells[:, 1] + 1) * W + np.arange(len(cells))  # x >= -1 keeps enc >= 0
        j = np.searchsorted(cpos, qpos, side="left") - 1
        ys = np.unique(cells[:, 2])
        if len(ys) == 1:
            run = np.maximum.accumulate(enc)
            best = np.where(j >= 0, run[np.maximum(j, 0)], -1)
            hit = (qs[:, 2] <= ys[0]) & (best >= 0) & (best // W - 1 >= qs[:, 1])
            ans[qrank[hit]] = cells[best[hit] % W, 0]
            s.charge_writes(cfg.blocks(len(qs)))
            return
        f = max(2, min(cfg.fan_in, len(ys)))
        bounds = np.unique(ys[(np.arange(1, f) * len(ys)) // f])
        f = len(bounds) + 1
        cs = np.searchsorted(bounds, cells[:, 2], side="right")
        qstr = np.searchsorted(bounds, qs[:, 2], side="right")
        mat = np.full((f + 1, len(cells)), -1, dtype=np.int64)
        for u in range(f):
            mat[u] = np.maximum.accumulate(np.where(cs == u, enc, -1))
        for u in range(f - 1, -1, -1):
            np.maximum(mat[u], mat[u + 1], out=mat[u])
        upper = np.where(j >= 0, mat[qstr + 1, np.maximum(j, 0)], -1)
        hit = (upper >= 0) & (upper // W - 1 >= qs[:, 1])
        ans[qrank[hit]] = cells[upper[hit] % W, 0]
        rest = ~hit
        s.charge_writes(cfg.blocks(len(cells) + int(rest.sum())))
        for u in range(f):
            cm = cs == u
            qm = rest & (qstr == u)
            if qm.any() and cm.any():
                self.run(cells[cm], cpos[cm], qs[qm], qpos[qm], qrank[qm])
