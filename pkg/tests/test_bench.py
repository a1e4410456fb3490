import csv
import io
import math

import numpy as np
import pytest
from click.testing import CliRunner

from emdquery import Verdict, WeightedPointSet
from emdquery.bench import CSV_COLUMNS, parse_theta_range, run_bench, truth_label
from emdquery.cli import main
from emdquery.io import write_points


def tiny_pair(rng, n=12):
    x = rng.normal(size=(n, 3))
    return WeightedPointSet.uniform(x), WeightedPointSet.uniform(x + rng.normal(scale=0.3, size=x.shape))


def test_sign_forced_sweep(rng):
    a, b = tiny_pair(rng)
    rep = run_bench(a, b, [-4, 4], [0.05], repeat=2)
    assert [r.verdict for r in rep.rows] == [Verdict.CASE1, Verdict.CASE2]
    assert [r.truth_case for r in rep.rows] == ["CASE1", "CASE2"]
    assert rep.precision == 1.0
    for r in rep.rows:
        assert math.isfinite(r.ratio_net) and math.isfinite(r.ratio_sin)
        assert r.n == 24
    assert rep.emd_sinkhorn >= rep.emd - 1e-9


def test_csv_schema(rng):
    a, b = tiny_pair(rng)
    rep = run_bench(a, b, parse_theta_range("-2..2"), [0.03, 0.05], baselines=("net",))
    buf = io.StringIO()
    rep.write_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == CSV_COLUMNS
    assert len(rows) == 1 + 10
    body = [dict(zip(rows[0], r)) for r in rows[1:]]
    assert all(r["time_sin_s"] == "" and r["ratio_sin"] == "" for r in body)
    assert [r["theta"] for r in body[:5]] == ["-2", "-1", "0", "1", "2"]
    # T = EMD exactly: only CASE3 or a sign-consistent tie are acceptable
    mid = body[2]
    assert mid["truth_case"] == "CASE1|CASE2|CASE3"


def test_deterministic_columns(rng):
    a, b = tiny_pair(rng)
    r1 = run_bench(a, b, [-3, 0, 3], [0.05], baselines=("net",))
    r2 = run_bench(a, b, [-3, 0, 3], [0.05], baselines=("net",))
    keep = lambda rep: [(r.theta, r.eps, r.n, r.verdict, r.truth_case, r.levels) for r in rep.rows]
    assert keep(r1) == keep(r2)


def test_parse_theta_range():
    assert parse_theta_range("-3..3") == [-3, -2, -1, 0, 1, 2, 3]
    assert parse_theta_range("-4,4") == [-4.0, 4.0]
    with pytest.raises(ValueError):
        parse_theta_range("3..1")


def test_truth_label():
    assert truth_label(2.0, 1.0, 0.1, 1.0) == "CASE1"
    assert truth_label(1.0, 1.02, 0.1, 1.0) == "CASE2|CASE3"


def test_precision_on_fixture_trials():
    # with the exact sub-solver every resolved trial must be right
    rng = np.random.default_rng(99)
    total = correct = 0
    for k in range(10):
        a, b = tiny_pair(rng, n=20)
        rep = run_bench(a, b, [-6, -3, -1, 1, 3, 6, -2, 2, -5, 5], [0.05], baselines=("net",))
        total += len(rep.rows)
        correct += sum(r.correct for r in rep.rows)
    assert total == 100
    assert correct == total


def test_bench_cli(tmp_path, rng):
    a, b = tiny_pair(rng)
    write_points(tmp_path / "a.bin", a)
    write_points(tmp_path / "b.bin", b)
    out = tmp_path / "r.csv"
    r = CliRunner().invoke(
        main,
        ["bench", "--a", str(tmp_path / "a.bin"), "--b", str(tmp_path / "b.bin"), "--theta-range", "-1..1",
         "--eps", "0.05", "--baselines", "net", "--out", str(out)],
    )
    assert r.exit_code == 0, r.output
    assert "precision: 1.0000" in r.output
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3
    bad = CliRunner().invoke(main, ["bench", "--a", str(tmp_path / "a.bin"), "--b", str(tmp_path / "b.bin"),
                                    "--baselines", "fastemd", "--out", str(out)])
    assert bad.exit_code == 2
