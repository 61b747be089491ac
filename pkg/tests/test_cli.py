import json

import numpy as np

from iocut import cli


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    cli.main(["gen", "--n", "16", "--q", "3", "--seed", "1", "--out-dir", str(a)])
    cli.main(["gen", "--n", "16", "--q", "3", "--seed", "1", "--out-dir", str(b)])
    assert (a / "points.txt").read_bytes() == (b / "points.txt").read_bytes()
    assert cli.read_table(a / "points.txt").shape == (16, 3)


def test_chain_ranks_coincide():
    w = cli.Workload(n=50, dist="chain")
    _, _, pts, _ = cli.make_workload(w)
    assert (pts[:, 1] == pts[:, 2]).all() and (pts[:, 2] == pts[:, 3]).all()


def test_clustered_octant():
    rng = np.random.default_rng(3)
    raw = cli.gen_points(1000, "clustered", rng)
    best = max(((raw >= np.array(o) * 0.5) & (raw < np.array(o) * 0.5 + 0.5)).all(axis=1).sum()
               for o in np.ndindex(2, 2, 2))
    assert best >= 500


def test_build_universal_row(capsys):
    row = cli.cmd_build(cli.Workload(n=100, k=100), False, False, None)
    assert row["cells"] == 1
    assert capsys.readouterr().out.splitlines()[0] == ",".join(cli.BUILD_COLS)


def test_build_verify_exhaustive(capsys, tmp_path):
    w = cli.Workload(n=40, k=3, m=64, b=4, dist="antichain")
    row = cli.cmd_build(w, True, True, tmp_path)
    assert row["valid"]
    assert "violations=0" in capsys.readouterr().out
    assert (tmp_path / "cutting.txt").read_text().startswith("k=3 n=40")


def test_offline_commands(capsys):
    st = cli.cmd_offline_report(cli.Workload(n=3000, q=100), True, None)
    assert st["mismatches"] == 0
    st = cli.cmd_offline_count(cli.Workload(n=3000, q=100, eps=0.1), True, None)
    assert st["violations"] == 0 and st["min_ratio"] >= 0.9
    st = cli.cmd_offline_count(cli.Workload(n=3000, q=0), True, None)
    assert st["query_io"] == 0
    lines = [json.loads(x) for x in capsys.readouterr().out.splitlines()]
    assert len(lines) == 3
