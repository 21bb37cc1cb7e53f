import json

import pytest

from yamabe_nondeg import cli
from yamabe_nondeg.report import Record, VerificationReport, check, emit_json


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_condition_csv(capsys):
    code, out, _ = run(["check-condition", "--n", "4,5", "--grid", "64", "--format", "csv"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("id,anchor,status,tolerance,n,holds,min_margin,argmin_x,zero_ratio,pi_lhs")
    assert lines[1].startswith("condition/n=4,")


def test_range_parsing():
    assert cli.parse_int_list("4..7") == [4, 5, 6, 7]
    assert cli.parse_int_list("4,6..7") == [4, 6, 7]
    with pytest.raises(cli.ConfigError):
        cli.parse_int_list("x")


def test_config_errors(capsys, tmp_path):
    assert run(["check-condition", "--n", "3"], capsys)[0] == 2
    assert run(["spectrum", "--k", "1"], capsys)[0] == 2
    assert run(["bubble", "--q", "5"], capsys)[0] == 2
    bad = tmp_path / "c.json"
    bad.write_text('{"bogus": 1}')
    assert run(["check-condition", "--config", str(bad)], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2


def test_precedence(tmp_path):
    conf = tmp_path / "c.json"
    conf.write_text(json.dumps({"n": "5", "grid": 100, "format": "csv"}))
    args = cli.build_parser().parse_args(["check-condition", "--config", str(conf), "--grid", "64"])
    cfg = cli.resolve_config(args)
    assert cfg.grid == 64  # flag beats file
    assert cfg.format == "csv"  # file beats default
    assert cfg.n == [5]


def test_overflow_surfaces_cleanly(capsys):
    code, out, _ = run(["spectrum", "--n", "48", "--k", "2048"], capsys)
    assert code == 3
    rec = json.loads(out)["records"][0]
    assert rec["status"] == "fail" and "scale-overflow" in rec["values"]["error"]


def test_spectrum_json(capsys, tmp_path):
    path = tmp_path / "r.json"
    code, _, _ = run(["spectrum", "--n", "4", "--k", "16", "--out", str(path)], capsys)
    assert code == 0
    rep = VerificationReport.from_json(path.read_text())
    assert rep.records[0].status == "pass"
    assert len(rep.records) == 17
    assert rep.records[5].values["case"] == "Regular"


def test_bubble_grid_and_kelvin(capsys, tmp_path):
    grid = tmp_path / "g.csv"
    code, out, _ = run(["bubble", "--n", "4", "--k", "8", "--kelvin-samples", "1000", "--emit-grid", str(grid)], capsys)
    assert code == 0
    assert grid.read_text().splitlines()[0] == "x1,x2,x3,x4,value"
    recs = {r["id"]: r for r in json.loads(out)["records"]}
    assert recs["bubble/n=4,k=8/kelvin"]["values"]["max_relative"] < 1e-10


def test_timings_flag(capsys):
    code, out, _ = run(["check-condition", "--n", "4", "--grid", "64", "--timings"], capsys)
    assert all("runtime_ms" in r for r in json.loads(out)["records"])
    code, out, _ = run(["check-condition", "--n", "4", "--grid", "64"], capsys)
    assert not any("runtime_ms" in r for r in json.loads(out)["records"])


def test_jobs_do_not_change_output(capsys):
    argv = ["spectrum", "--n", "4,5", "--k", "8,16"]
    _, a, _ = run(argv + ["--jobs", "1"], capsys)
    _, b, _ = run(argv + ["--jobs", "2"], capsys)
    assert a == b


def test_report_roundtrip():
    rep = VerificationReport("demo", {"n": [4]}, [check("a", "plumbing", True, {"x": 0.1, "y": [1.0, 2.5e-300]}, 1e-9)])
    text = rep.to_json()
    back = VerificationReport.from_json(text)
    assert back.to_dict() == rep.to_dict()
    assert back.to_json() == text
    assert "0.10000000000000001" in text  # 17 significant digits


def test_report_rules():
    with pytest.raises(ValueError):
        Record("a", "", "pass")
    with pytest.raises(ValueError):
        Record("a", "x", "maybe")
    rep = VerificationReport("s", {}, [check("a", "x", False, {})])
    assert not rep.ok and rep.summary["fail"] == 1
    assert emit_json(float("nan")) == '"NaN"'
