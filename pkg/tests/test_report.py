from __future__ import annotations

import json
import math

import numpy as np
import pytest

from dp5count import cli
from dp5count.constants import assemble_constant
from dp5count.cubics import canonical_spec
from dp5count.report import (
    FitError,
    RunConfig,
    build_report,
    fit_leading,
    geometric_grid,
    plot_script,
    read_count_grid,
    run_count_grid,
    trending_to_one,
)

GOLDEN_GRID = (
    "B,N,raw,class0,class1,class2,class3,class4,status\n"
    "100,2370,75840,480,498,486,474,432,ok\n"
    "1000,66912,2141184,13434,13610,13494,13378,12996,ok\n"
)

GRID = [1e3, 10**3.5, 1e4, 10**4.5, 1e5, 10**5.5, 1e6]


def _body(csv_text):
    return "".join(ln + "\n" for ln in csv_text.splitlines() if not ln.startswith("#"))


def test_geometric_grid():
    assert geometric_grid(1e3, 1e6, 7) == (1000, 3162, 10000, 31622, 100000, 316227, 1000000)
    assert geometric_grid(10, 10, 1) == (10,)
    assert geometric_grid(1, 2, 0) == ()


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(grid=(10, 5))
    with pytest.raises(ValueError):
        RunConfig(shards=0)
    with pytest.raises(ValueError):
        RunConfig(engine="fast")


def test_count_grid_golden_and_shard_independent():
    a = run_count_grid(RunConfig("Q", "std6", "reduced", (100, 1000)))
    b = run_count_grid(RunConfig("Q", "std6", "reduced", (100, 1000), shards=3))
    assert _body(a) == GOLDEN_GRID
    assert a == b
    assert a.startswith("# schema=1 ")
    assert read_count_grid(a) == [(100, 2370), (1000, 66912)]


def test_count_grid_empty_is_header_only():
    text = run_count_grid(RunConfig("Q", "sym12", "direct", ()))
    assert _body(text) == "B,N,raw,class0,class1,class2,class3,class4,status\n"


def test_count_grid_budget_flagged():
    text = run_count_grid(RunConfig("Q(i)", "std6", "direct", (10**5,)))
    assert text.rstrip().endswith("budget-exceeded")
    assert read_count_grid(text) == []


def test_fit_exact_recovery():
    B = np.array(GRID)
    L = np.log(B)
    f = fit_leading(list(zip(B, 0.37 * B * L**4)), c_target=0.37)
    assert f.c4 == pytest.approx(0.37, rel=1e-9)
    assert max(abs(c) for c in f.coeffs[:4]) <= 1e-9 * 0.37 * 10
    assert f.ratio == pytest.approx(1.0, rel=1e-9)
    lo, hi = f.ratio_interval
    assert lo == pytest.approx(1.0, rel=1e-8) and hi == pytest.approx(1.0, rel=1e-8)


def test_fit_two_terms():
    B = np.array(GRID)
    L = np.log(B)
    f = fit_leading(list(zip(B, B * L**4 + B * L**3)))
    assert f.coeffs[4] == pytest.approx(1.0, rel=1e-8)
    assert f.coeffs[3] == pytest.approx(1.0, rel=1e-7)


def test_fit_rejects_weak_grids():
    with pytest.raises(FitError):
        fit_leading([(10**k, 1.0) for k in (3, 4, 5, 6, 7)])
    with pytest.raises(FitError):
        fit_leading([(1000 + k, 1.0) for k in range(8)])


def test_trending_to_one():
    assert trending_to_one([(1, 0.5), (2, 0.6), (3, 0.8)])
    assert not trending_to_one([(1, 0.9), (2, 0.6), (3, 0.8)])


@pytest.fixture(scope="module")
def breakdown():
    return assemble_constant("Q", canonical_spec("std6", "Q"), p_max=10**4)


def test_report_contents_and_hash(breakdown):
    data = [(100, 2370), (1000, 66912)]
    r1 = build_report(data, breakdown, None)
    r2 = build_report(data, breakdown, None)
    assert r1["alpha"] == "1/144" and r1["constant"]["alpha"] == "1/144"
    assert r1["report_hash"] == r2["report_hash"]
    assert all(p["ratio"] > 0 for p in r1["ratio_curve"])
    script = plot_script(r1)
    compile(script, "plot.py", "exec")
    assert "N(B) / (c B (log B)^4)" in script


def test_cli_count_and_exit_codes(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert cli.main(["count", "--field", "Q", "--heights", "sym12", "--B", "100",
                     "--out", str(out)]) == 0
    assert read_count_grid(out) == [(100, 1320)]
    assert cli.main(["count", "--field", "Q(sqrt-5)", "--B", "10"]) == 1
    assert cli.main(["verify", "--suite", "local", "--field", "Q(sqrt-7)"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["passed"] and rep["suite"] == "local"
    assert cli.main(["constant", "--field", "Q", "--p-max", "100", "--rtol", "1e-9"]) == 2


def test_cli_constant_and_stats(tmp_path, capsys):
    js = tmp_path / "c.json"
    assert cli.main(["constant", "--field", "Q", "--heights", "sym12", "--p-max", "1000",
                     "--json", str(js)]) == 0
    d = json.loads(js.read_text())
    assert d["alpha"] == "1/144" and d["c"] > 0
    assert cli.main(["stats", "--field", "Q", "--B", "1000", "--W", "1", "4"]) == 0
    s = json.loads(capsys.readouterr().out)
    assert len(s["w_tail_fraction"]) == 2


def test_cli_report(tmp_path):
    js, plot = tmp_path / "r.json", tmp_path / "p.py"
    args = ["report", "--field", "Q", "--heights", "std6", "--B", "100", "1000",
            "--p-max", "1000", "--json", str(js), "--plot", str(plot)]
    assert cli.main(args) == 0
    h1 = json.loads(js.read_text())["report_hash"]
    assert cli.main(args) == 0
    assert json.loads(js.read_text())["report_hash"] == h1
    assert plot.read_text().startswith('"""Plot')
    assert math.isfinite(json.loads(js.read_text())["constant"]["c"])
