"""Workload generation, drivers and validation from the command line.

    python3 -m iocut.cli gen --n 4096 --q 256 --dist clustered --out-dir runs/a
    python3 -m iocut.cli build --n 65536 --k 256 --verify
    python3 -m iocut.cli offline-report --n 65536 --q 2048 --verify
    python3 -m iocut.cli offline-count --n 65536 --q 4096 --eps 0.1 --verify
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .approxcount import build_approx, offline_approx_count
from .cutting3d import CuttingParams, build_cutting
from .geometry import rank_space_reduce
from .iomodel import IoConfig, open_session
from .offreport import build_report_structure, offline_report, report_bound
from .oracle import depths, validate_cutting

DISTS = ("uniform", "clustered", "chain", "antichain")
BUILD_COLS = ["N", "M", "B", "k", "cells", "max_conflict", "io_total", "io_per_sortN"]


@dataclass(frozen=True)
class Workload:
    seed: int = 1
    n: int = 4096
    q: int = 0
    dist: str = "uniform"
    m: int = 1024
    b: int = 16
    k: int = 64
    eps: float = 0.1


def gen_points(n: int, dist: str, rng: np.random.Generator) -> np.ndarray:
    if dist == "uniform":
        return rng.random((n, 3))
    if dist == "clustered":
        # at least half the points inside one random octant
        lo = rng.integers(0, 2, size=3) * 0.5
        inner = (n + 1) // 2 + rng.integers(0, n // 2 + 1)
        inner = min(n, inner)
        a = lo + 0.5 * rng.random((inner, 3))
        return np.concatenate([a, rng.random((n - inner, 3))])[rng.permutation(n)]
    if dist == "chain":
        t = np.sort(rng.random(n))
        return np.stack([t, t, t], axis=1)
    if dist == "antichain":
        # x + y constant, z random: no point dominates another in xy
        t = rng.random(n)
        return np.stack([t, 1.0 - t, rng.random(n)], axis=1)
    raise ValueError(f"unknown distribution {dist!r}")


def gen_queries(nq: int, rng: np.random.Generator) -> np.ndarray:
    # mixed depths: powers push corners towards the origin
    return rng.random((nq, 3)) ** rng.choice([1.0, 3.0, 8.0, 20.0], size=(nq, 1))


def make_workload(w: Workload) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Raw points, raw queries, rank-space points, rank-space queries."""
    rng = np.random.default_rng(w.seed)
    raw = gen_points(w.n, w.dist, rng)
    qraw = gen_queries(w.q, rng)
    pts, maps = rank_space_reduce(raw)
    return raw, qraw, pts, maps.queries(qraw)


def write_table(path: Path, rows: np.ndarray, fmt: str) -> None:
    with open(path, "w") as f:
        f.write(f"{len(rows)}\n")
        for i, r in enumerate(rows):
            f.write(f"{i} " + " ".join(fmt % v for v in r) + "\n")


def read_table(path: Path) -> np.ndarray:
    with open(path) as f:
        n = int(f.readline())
        data = np.loadtxt(f, ndmin=2) if n else np.empty((0, 4))
    return data[:, 1:4]


def sort_n(N: int, M: int, B: int) -> float:
    return (N / B) * (1 + math.log(max(N / B, 1.0)) / math.log(M / B))


def cmd_gen(w: Workload, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    raw, qraw, _, _ = make_workload(w)
    write_table(out / "points.txt", raw, "%.17g")
    write_table(out / "queries.txt", qraw, "%.17g")
    (out / "workload.json").write_text(json.dumps(asdict(w), indent=1) + "\n")


def cmd_build(w: Workload, verify: bool, exhaustive: bool, out: Path | None,
              header: bool = True) -> dict:
    _, _, pts, _ = make_workload(w)
    s = open_session(IoConfig(w.m, w.b))
    P = s.place(pts, "points")
    with s.measure() as m:
        cut = build_cutting(P, min(w.k, w.n), CuttingParams())
    row = {"N": w.n, "M": w.m, "B": w.b, "k": cut.k, "cells": len(cut),
           "max_conflict": cut.max_conflict(), "io_total": m.total,
           "io_per_sortN": round(m.total / sort_n(w.n, w.m, w.b), 3)}
    buf = io.StringIO()
    wr = csv.DictWriter(buf, fieldnames=BUILD_COLS, lineterminator="\n")
    wr.writeheader()
    wr.writerow(row)
    text = buf.getvalue()
    print(text if header else text.split("\n", 1)[1], end="")
    if verify:
        sample = "exhaustive" if exhaustive else 10_000
        rep = validate_cutting(pts, cut.k, cut, sample=sample,
                               rng=np.random.default_rng(w.seed))
        print(rep.summary())
        row["valid"] = rep.ok
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        (out / "cutting.txt").write_text(cut.dump() + "\n")
        (out / "build.csv").write_text(buf.getvalue())
    return row


def cmd_offline_report(w: Workload, verify: bool, out: Path | None) -> dict:
    _, _, pts, Q = make_workload(w)
    s = open_session(IoConfig(w.m, w.b))
    P = s.place(pts, "points")
    R = build_report_structure(P)
    res = offline_report(R, Q)
    bound = report_bound(w.n, w.q, res.K, w.m, w.b)
    st = {"N": w.n, "Q": w.q, "levels": R.ks, "K": res.K, "query_io": res.query_io,
          "build_io": R.stats.build_io, "bound_ratio": round(res.query_io / bound, 3)}
    if verify:
        bad = 0
        for i, r in enumerate(Q):
            m = (pts[:, 1] <= r[1]) & (pts[:, 2] <= r[2]) & (pts[:, 3] <= r[3])
            if not np.array_equal(np.sort(pts[m, 0]), np.sort(res.answers[i])):
                bad += 1
        st["mismatches"] = bad
    print(json.dumps(st))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "report.txt", "w") as f:
            for i, a in enumerate(res.answers):
                f.write(f"{i} {len(a)} " + " ".join(map(str, np.sort(a))) + "\n")
    return st


def cmd_offline_count(w: Workload, verify: bool, out: Path | None) -> dict:
    _, _, pts, Q = make_workload(w)
    s = open_session(IoConfig(w.m, w.b))
    P = s.place(pts, "points")
    tree = build_approx(P, w.eps)
    res = offline_approx_count(tree, Q)
    lg = math.log(max(w.n / w.b, 1.0)) / math.log(w.m / w.b)
    st = {"N": w.n, "Q": w.q, "eps": w.eps, "query_io": res.query_io,
          "build_io": tree.stats.build_io,
          "io_per_query_over_logB": round(res.query_io / max(w.q, 1) / (lg / w.b), 3)}
    if verify and w.q:
        d = depths(pts, Q[:, 1:4])
        ok = (res.values <= d) & (res.values >= (1 - w.eps) * d)
        nz = d > 0
        st["violations"] = int((~ok).sum())
        st["min_ratio"] = float((res.values[nz] / d[nz]).min()) if nz.any() else 1.0
    print(json.dumps(st))
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        np.savetxt(out / "counts.txt", np.stack([np.arange(w.q), res.values], 1), fmt="%d")
    return st


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="iocut")
    ap.add_argument("command", choices=["gen", "build", "offline-report", "offline-count"])
    ap.add_argument("--n", type=int, default=4096)
    ap.add_argument("--q", type=int, default=0)
    ap.add_argument("--b", type=int, default=16)
    ap.add_argument("--m", type=int, default=1024)
    ap.add_argument("--k", type=int, default=64)
    ap.add_argument("--eps", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--dist", choices=DISTS, default="uniform")
    ap.add_argument("--verify", action="store_true")
    ap.add_argument("--exhaustive", action="store_true", help="all rank apexes (N <= 64)")
    ap.add_argument("--out-dir", type=Path, default=None)
    a = ap.parse_args(argv)
    w = Workload(a.seed, a.n, a.q, a.dist, a.m, a.b, a.k, a.eps)
    t = time.time()
    if a.command == "gen":
        cmd_gen(w, a.out_dir or Path("."))
    elif a.command == "build":
        cmd_build(w, a.verify, a.exhaustive, a.out_dir)
    elif a.command == "offline-report":
        cmd_offline_report(w, a.verify, a.out_dir)
    else:
        cmd_offline_count(w, a.verify, a.out_dir)
    print(f"# {time.time() - t:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
