"""Brute-force references. None of these touch I/O accounting."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import C_ID, X, Y, Z, Cutting, dominated_mask


def oracle_depth(points: np.ndarray, apex) -> int:
    return int(dominated_mask(points, apex).sum())


def oracle_report(points: np.ndarray, apex) -> np.ndarray:
    return points[dominated_mask(points, apex)]


def oracle_up_count(points: np.ndarray, q) -> int:
    """|points in [qx,inf) x [qy,inf) x [qz,inf)|."""
    return int(((points[:, X] >= q[0]) & (points[:, Y] >= q[1]) & (points[:, Z] >= q[2])).sum())


def depths(points: np.ndarray, apexes: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Depth of many apexes, vectorised in chunks."""
    apexes = np.asarray(apexes).reshape(-1, 3)
    out = np.empty(len(apexes), dtype=np.int64)
    px, py, pz = points[:, X], points[:, Y], points[:, Z]
    for s in range(0, len(apexes), chunk):
        a = apexes[s:s + chunk]
        m = (px[None, :] <= a[:, 0:1]) & (py[None, :] <= a[:, 1:2])
        m &= pz[None, :] <= a[:, 2:3]
        out[s:s + chunk] = m.sum(axis=1)
    return out


def covered(cell_apexes: np.ndarray, apexes: np.ndarray, chunk: int = 512) -> np.ndarray:
    """For each apex, whether some cell contains it."""
    apexes = np.asarray(apexes).reshape(-1, 3)
    out = np.zeros(len(apexes), dtype=bool)
    if len(cell_apexes) == 0:
        return out
    cx, cy, cz = cell_apexes[:, 0], cell_apexes[:, 1], cell_apexes[:, 2]
    for s in range(0, len(apexes), chunk):
        a = apexes[s:s + chunk]
        m = (a[:, 0:1] <= cx[None, :]) & (a[:, 1:2] <= cy[None, :]) & (a[:, 2:3] <= cz[None, :])
        out[s:s + chunk] = m.any(axis=1)
    return out


def exhaustive_depth_grid(points: np.ndarray, n: int) -> np.ndarray:
    """D[x+1, y+1, z+1] = depth of apex (x,y,z) for x,y,z in -1..n-1."""
    g = np.zeros((n + 1, n + 1, n + 1), dtype=np.int64)
    np.add.at(g, (points[:, X] + 1, points[:, Y] + 1, points[:, Z] + 1), 1)
    return g.cumsum(0).cumsum(1).cumsum(2)


def max_apex_along(points: np.ndarray, k: int, fixed: np.ndarray, axis: int, n: int) -> np.ndarray:
    """Largest coordinate on ``axis`` keeping depth <= k, other two fixed.

    ``fixed`` holds the two other coordinates in axis order. Returns n-1 when
    the whole column has depth <= k.
    """
    others = [a for a in (X, Y, Z) if a != 1 + axis]
    vals = points[:, 1 + axis]
    out = np.empty(len(fixed), dtype=np.int64)
    for i, (u, v) in enumerate(fixed):
        m = (points[:, others[0]] <= u) & (points[:, others[1]] <= v)
        col = vals[m]
        if len(col) <= k:
            out[i] = n - 1
        else:
            out[i] = np.partition(col, k)[k] - 1
    return out


def sample_shallow_apexes(points: np.ndarray, k: int, count: int,
                          rng: np.random.Generator) -> np.ndarray:
    """Apexes of depth <= k in rank space.

    Three quarters are maximal along one axis (exact-depth-k staircase),
    the rest are rejection-sampled from a log-uniform box distribution.
    """
    n = len(points)
    m = (3 * count) // 4
    parts = []
    for axis in range(3):
        c = m // 3 + (1 if axis < m % 3 else 0)
        fixed = rng.integers(-1, n, size=(c, 2))
        top = max_apex_along(points, k, fixed, axis, n)
        ap = np.empty((c, 3), dtype=np.int64)
        oth = [a for a in range(3) if a != axis]
        ap[:, oth[0]] = fixed[:, 0]
        ap[:, oth[1]] = fixed[:, 1]
        ap[:, axis] = top
        parts.append(ap)
    need = count - m
    got = []
    while need > 0:
        u = np.exp(rng.uniform(np.log(1.0 / n), 0.0, size=(4 * need + 16, 3)))
        cand = np.minimum((u * n).astype(np.int64) - 1, n - 1)
        d = depths(points, cand)
        ok = cand[d <= k][:need]
        got.append(ok)
        need -= len(ok)
    parts.extend(got)
    return np.concatenate(parts)


@dataclass
class ValidationReport:
    cell_ratio: float
    conflict_ratio: float
    tested: int
    violations: list = field(default_factory=list)
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations and not self.mismatches

    def summary(self) -> str:
        return (f"cells*k/N={self.cell_ratio:.3f} max_conflict/k={self.conflict_ratio:.3f} "
                f"tested={self.tested} violations={len(self.violations)} "
                f"mismatches={len(self.mismatches)}")


def validate_cutting(points: np.ndarray, k: int, cutting: Cutting, sample="exhaustive",
                     rng: np.random.Generator | None = None,
                     check_conflicts: bool = True) -> ValidationReport:
    n = len(points)
    ap = cutting.apexes()
    cells = cutting.cell_array()
    rep = ValidationReport(
        cell_ratio=len(ap) * k / max(n, 1),
        conflict_ratio=cutting.max_conflict() / k,
        tested=0,
    )
    if isinstance(sample, str) and sample == "exhaustive":
        if n > 64:
            raise ValueError("exhaustive validation needs N <= 64")
        g = exhaustive_depth_grid(points, n)
        idx = np.argwhere(g <= k) - 1
        tests = idx
    elif isinstance(sample, (int, np.integer)):
        tests = sample_shallow_apexes(points, k, int(sample), rng or np.random.default_rng(0))
    else:
        tests = np.asarray(sample).reshape(-1, 3)
    rep.tested = len(tests)
    cov = covered(ap, tests)
    rep.violations = [tuple(int(v) for v in t) for t in tests[~cov]]
    if check_conflicts:
        for i in range(len(cells)):
            got = np.sort(cutting.conflict_of(i)[:, 0])
            want = np.sort(oracle_report(points, ap[i])[:, 0])
            if len(got) != len(want) or not np.array_equal(got, want):
                rep.mismatches.append(int(cells[i, C_ID]))
    return rep
