"""Construction I/O over an N-sweep at k = sqrt(N B); CSV on stdout."""
import argparse
import math

from iocut import cli


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--exps", type=int, nargs="+", default=[14, 16, 18, 20])
    ap.add_argument("--m", type=int, default=1024)
    ap.add_argument("--b", type=int, default=16)
    ap.add_argument("--dist", default="uniform", choices=cli.DISTS)
    ap.add_argument("--verify", action="store_true")
    a = ap.parse_args()
    for i, e in enumerate(a.exps):
        n = 2**e
        w = cli.Workload(seed=e, n=n, dist=a.dist, m=a.m, b=a.b, k=math.isqrt(n * a.b))
        cli.cmd_build(w, a.verify, False, None, header=i == 0)


if __name__ == "__main__":
    main()
