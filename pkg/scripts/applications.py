"""Both offline applications over a few sizes, verified against brute force."""
import argparse

from iocut import cli


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--exps", type=int, nargs="+", default=[14, 16])
    ap.add_argument("--q", type=int, default=2048)
    ap.add_argument("--eps", type=float, nargs="+", default=[0.1, 0.5])
    a = ap.parse_args()
    for e in a.exps:
        w = cli.Workload(seed=e, n=2**e, q=a.q)
        cli.cmd_offline_report(w, True, None)
        for eps in a.eps:
            cli.cmd_offline_count(cli.Workload(seed=e, n=2**e, q=a.q, eps=eps), True, None)


if __name__ == "__main__":
    main()
