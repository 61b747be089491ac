"""External multiway merge sort.

Run formation loads ``floor(M/B)*B`` records at a time; merging uses fan-in
``floor(M/B) - 1`` with one output buffer. Two implementations share the same
pass structure and charge identical I/O: ``exact=True`` performs a genuine
block-by-block merge, the default fast path merges each group with a stable
numpy sort.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .iomodel import ExtSequence, IoConfig, Session


@dataclass(frozen=True)
class SortKey:
    """Lexicographic key over record columns.

    ``columns`` are most-significant first. ``descending`` is one flag per
    column (or a single bool). Ties are broken by ``tiebreak`` ascending,
    then by input position, so sorting is stable and deterministic.
    """
    columns: tuple[int, ...]
    descending: tuple[bool, ...] | bool = False
    tiebreak: int | None = 0

    def _flags(self) -> tuple[bool, ...]:
        if isinstance(self.descending, bool):
            return (self.descending,) * len(self.columns)
        assert len(self.descending) == len(self.columns)
        return tuple(self.descending)

    def key_matrix(self, records: np.ndarray) -> np.ndarray:
        """Columns, already signed for direction, most-significant first."""
        cols = []
        for c, d in zip(self.columns, self._flags()):
            v = records[:, c].astype(np.int64)
            cols.append(-v if d else v)
        if self.tiebreak is not None:
            cols.append(records[:, self.tiebreak].astype(np.int64))
        if not cols:
            return np.zeros((len(records), 0), dtype=np.int64)
        return np.stack(cols, axis=1)

    def order(self, records: np.ndarray) -> np.ndarray:
        km = self.key_matrix(records)
        if km.shape[1] == 0:
            return np.arange(len(records))
        return np.lexsort(km.T[::-1])


X_KEY = SortKey((1,))
Y_KEY = SortKey((2,))
Z_KEY = SortKey((3,))


def run_length(cfg: IoConfig) -> int:
    return (cfg.M // cfg.B) * cfg.B


def merge_passes(n: int, cfg: IoConfig) -> int:
    runs = -(-n // run_length(cfg))
    passes = 0
    while runs > 1:
        runs = -(-runs // cfg.fan_in)
        passes += 1
    return passes


def sort_io(n: int, cfg: IoConfig) -> int:
    """Exact block transfers of ``external_sort`` on n records (0 when n=0)."""
    if n == 0:
        return 0
    return 2 * cfg.blocks(n) * (1 + merge_passes(n, cfg))


def external_sort(seq: ExtSequence, key: SortKey, *, exact: bool = False,
                  name: str | None = None) -> ExtSequence:
    s = seq.session
    cfg = s.config
    n = len(seq)
    if n == 0:
        return s.empty(seq.width, name, seq.dtype)
    R = run_length(cfg)
    runs: list[np.ndarray] = []
    for chunk in seq.scan(R):
        runs.append(chunk[key.order(chunk)])
        s.charge_writes(cfg.blocks(len(chunk)))
    F = cfg.fan_in
    while len(runs) > 1:
        nxt = []
        for g in range(0, len(runs), F):
            group = runs[g:g + F]
            if len(group) == 1:
                # a lone run is still copied so every pass touches all data
                s.charge_reads(cfg.blocks(len(group[0])))
                s.charge_writes(cfg.blocks(len(group[0])))
                nxt.append(group[0])
            elif exact:
                nxt.append(_merge_blocks(s, group, key))
            else:
                for r in group:
                    s.charge_reads(cfg.blocks(len(r)))
                cat = np.concatenate(group)
                nxt.append(cat[_stable_order(key, cat)])
                s.charge_writes(cfg.blocks(len(cat)))
        runs = nxt
    return s.place(runs[0], name)  # writes already charged above


def _stable_order(key: SortKey, records: np.ndarray) -> np.ndarray:
    km = key.key_matrix(records)
    km = np.concatenate([km, np.arange(len(records))[:, None]], axis=1)
    return np.lexsort(km.T[::-1])


def _lex_le(a: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Row-wise a <= t for lexicographic integer rows."""
    le = np.ones(len(a), dtype=bool)
    decided = np.zeros(len(a), dtype=bool)
    for c in range(a.shape[1]):
        lt = a[:, c] < t[c]
        gt = a[:, c] > t[c]
        le[~decided & gt] = False
        decided |= lt | gt
    return le


def _merge_blocks(s: Session, group: list[np.ndarray], key: SortKey) -> np.ndarray:
    """Block-level F-way merge holding one block per run plus one output block."""
    B = s.B
    s.require_memory((len(group) + 1) * B)
    # full keys: key columns + run index + position make every record unique
    fk = []
    for r_i, r in enumerate(group):
        km = key.key_matrix(r)
        extra = np.stack([np.full(len(r), r_i), np.arange(len(r))], axis=1)
        fk.append(np.concatenate([km, extra], axis=1))
    pos = [0] * len(group)  # next unread record per run
    buf_lo = [0] * len(group)  # first unconsumed buffered record per run
    for i in range(len(group)):
        pos[i] = min(B, len(group[i]))
        if pos[i]:
            s.charge_reads(1)
    out = []
    out_pending = 0
    while True:
        live = [i for i in range(len(group)) if buf_lo[i] < pos[i]]
        if not live:
            break
        more = [i for i in live if pos[i] < len(group[i])]
        if more:
            thr = min((fk[i][pos[i] - 1] for i in more), key=tuple)
        cand_keys, cand_rec = [], []
        for i in live:
            ks = fk[i][buf_lo[i]:pos[i]]
            take = len(ks) if not more else int(_lex_le(ks, thr).sum())
            if take:
                cand_keys.append(ks[:take])
                cand_rec.append(group[i][buf_lo[i]:buf_lo[i] + take])
                buf_lo[i] += take
        ck = np.concatenate(cand_keys)
        cr = np.concatenate(cand_rec)
        o = np.lexsort(ck.T[::-1])
        out.append(cr[o])
        out_pending += len(cr)
        s.charge_writes(out_pending // B)
        out_pending %= B
        for i in live:
            if buf_lo[i] == pos[i] and pos[i] < len(group[i]):
                pos[i] = min(pos[i] + B, len(group[i]))
                s.charge_reads(1)
    if out_pending:
        s.charge_writes(1)
    return np.concatenate(out)
