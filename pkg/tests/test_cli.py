import json
import os

import pytest

from railevac.cli import run, write_atomic


@pytest.fixture
def data_args(sample_paths):
    return ["--stations", str(sample_paths["stations"]), "--lines", str(sample_paths["lines"]),
            "--passengers", str(sample_paths["passengers"])]


def test_simulate_happy_path(tmp_path, data_args, capsys):
    out = tmp_path / "plan.json"
    code = run(["simulate", *data_args, "--blocked", "TOKYO", "--tlm", "30",
                "--capacity-ratio", "1.5", "--out", str(out)])
    assert code == 0
    plan = json.loads(out.read_text())
    assert plan["status"] == "OPTIMAL"
    assert plan["total_evacuated"] == pytest.approx(460000 / 40)
    assert all(f["from"] == "TOKYO" for f in plan["flows"])
    assert "ATT" in capsys.readouterr().out


def test_capacity_ratio_must_exceed_one(tmp_path, data_args, capsys):
    code = run(["simulate", *data_args, "--blocked", "TOKYO", "--capacity-ratio", "1.0",
                "--out", str(tmp_path / "p.json")])
    assert code == 2
    err = capsys.readouterr().err
    assert "--capacity-ratio" in err and "greater than 1" in err
    assert not (tmp_path / "p.json").exists()


def test_unknown_blocked_station(tmp_path, data_args, capsys):
    code = run(["simulate", *data_args, "--blocked", "NOSUCH", "--out", str(tmp_path / "p.json")])
    assert code == 2
    assert "NOSUCH" in capsys.readouterr().err


def test_infeasible_exit_code(tmp_path, data_args, capsys):
    blocked = [a for s in ("TOKYO", "OTEMACHI", "GINZA", "TOKYO_M", "NIHOMBASHI")
               for a in ("--blocked", s)]
    code = run(["simulate", *data_args, *blocked, "--capacity-ratio", "1.05",
                "--out", str(tmp_path / "p.json")])
    assert code == 3
    err = capsys.readouterr().err
    assert "INFEASIBLE_PRECHECK" in err and "TOKYO:" in err


def test_multiple_blocked_stations(tmp_path, data_args):
    out = tmp_path / "plan.json"
    assert run(["simulate", *data_args, "--blocked", "TOKYO", "--blocked", "GINZA",
                "--out", str(out)]) == 0
    assert {f["from"] for f in json.loads(out.read_text())["flows"]} == {"TOKYO", "GINZA"}


def test_scenario_file_and_inline_flags_conflict(tmp_path, data_args, sample_paths, capsys):
    code = run(["simulate", *data_args, "--scenario", str(sample_paths["scenario"]),
                "--blocked", "TOKYO", "--out", str(tmp_path / "p.json")])
    assert code == 2
    assert "--blocked" in capsys.readouterr().err


def test_scenario_file_and_report_roundtrip(tmp_path, data_args, sample_paths):
    plan = tmp_path / "plan.json"
    direct = tmp_path / "direct.csv"
    assert run(["simulate", *data_args, "--scenario", str(sample_paths["scenario"]),
                "--out", str(plan), "--report", str(direct)]) == 0
    later = tmp_path / "later.csv"
    assert run(["report", *data_args, "--scenario", str(sample_paths["scenario"]),
                "--plan", str(plan), "--out", str(later)]) == 0
    assert later.read_bytes() == direct.read_bytes()


def test_report_rejects_plan_from_other_scenario(tmp_path, data_args):
    plan = tmp_path / "plan.json"
    assert run(["simulate", *data_args, "--blocked", "TOKYO", "--out", str(plan)]) == 0
    assert run(["report", *data_args, "--blocked", "GINZA", "--plan", str(plan),
                "--out", str(tmp_path / "r.csv")]) == 2


@pytest.mark.parametrize("fmt", ["csv", "json", "geojson"])
def test_report_formats(tmp_path, data_args, fmt):
    rep = tmp_path / f"r.{fmt}"
    assert run(["simulate", *data_args, "--blocked", "TOKYO", "--out", str(tmp_path / "p.json"),
                "--report", str(rep), "--format", fmt, "--top-k", "3"]) == 0
    text = rep.read_text()
    if fmt == "csv":
        assert len(text.splitlines()) == 4
    else:
        json.loads(text)


def test_tlm_contradicting_scenario(tmp_path, data_args, sample_paths):
    assert run(["simulate", *data_args, "--scenario", str(sample_paths["scenario"]),
                "--tlm", "45", "--out", str(tmp_path / "p.json")]) == 2


def test_build_cost(tmp_path, data_args):
    out = tmp_path / "cost.json"
    assert run(["build-cost", *data_args, "--tlm", "20", "--one-transfer",
                "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["n"] == 14 and data["params"]["one_transfer_refinement"] is True
    assert all(e["minutes"] <= 20 for e in data["entries"])


def test_generate_then_simulate(tmp_path):
    d = tmp_path / "gen"
    assert run(["generate", "--out-dir", str(d), "--seed", "42", "--n-stations", "60",
                "--n-lines", "6"]) == 0
    args = ["--stations", str(d / "stations.csv"), "--lines", str(d / "lines.csv"),
            "--passengers", str(d / "passengers.csv")]
    code = run(["simulate", *args, "--blocked", "S00", "--tlm", "60",
                "--out", str(tmp_path / "p.json")])
    assert code in (0, 3)


def test_generate_invalid(tmp_path):
    assert run(["generate", "--out-dir", str(tmp_path), "--n-stations", "1"]) == 2


def test_bad_csv_names_file(tmp_path, data_args, capsys):
    bad = tmp_path / "stations.csv"
    bad.write_text("station_id,name,operator,lat,lon\nTOKYO,Tokyo,JR,95,139\n")
    args = list(data_args)
    args[1] = str(bad)
    assert run(["simulate", *args, "--blocked", "TOKYO", "--out", str(tmp_path / "p.json")]) == 2
    err = capsys.readouterr().err
    assert "stations.csv" in err and "line 2" in err and "lat" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run(["simulate"])
    assert exc.value.code == 2


def test_write_atomic_leaves_no_temp_files(tmp_path):
    target = tmp_path / "out.txt"
    write_atomic(target, "one")
    write_atomic(target, "two")
    assert target.read_text() == "two"
    assert os.listdir(tmp_path) == ["out.txt"]
