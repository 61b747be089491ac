"""Per-query I/O of grid counting against (N/B)^gamma."""
import argparse

import numpy as np

from iocut.gridstruct import GridParams, GridTree
from iocut.iomodel import IoConfig, Session


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--exps", type=int, nargs="+", default=[12, 14, 16, 18])
    ap.add_argument("--b", type=int, default=16)
    ap.add_argument("--gamma", type=float, default=0.25)
    ap.add_argument("--queries", type=int, default=500)
    a = ap.parse_args()
    rng = np.random.default_rng(0)
    print("N,slabs,build_io,count_io_per_query,c")
    for e in a.exps:
        n = 2**e
        p = np.stack([np.arange(n)] + [rng.permutation(n) for _ in range(3)], 1)
        s = Session(IoConfig(1024, a.b))
        with s.measure() as mb:
            t = GridTree(s, p, n, GridParams(gamma=a.gamma))
        q = rng.integers(-1, n + 1, (a.queries, 3))
        with s.measure() as mq:
            for x in q:
                t.count(x)
        per = mq.total / a.queries
        print(f"{n},{t.slabs},{mb.total},{per:.1f},{per / (n / a.b) ** a.gamma:.2f}")


if __name__ == "__main__":
    main()
