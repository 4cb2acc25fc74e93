from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from conictori.cli import RunConfig, UsageError, main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out=out)
    return code, out.getvalue()


def _total(text):
    line = next(line for line in text.splitlines() if line.strip().startswith("total"))
    return int(line.split()[-1])


def test_census_n3_total(tmp_path):
    code, text = run("census", "--n", "3", "--json", str(tmp_path / "out.json"))
    assert code == 0
    assert _total(text) == 9
    data = json.loads((tmp_path / "out.json").read_text())
    assert data["total"] == 9 and data["hull_points"] == 5
    assert [c["count"] for c in data["classes"]] == [1, 1, 3, 3, 1]
    assert data["metadata"]["kappa_source"] == "calibrated"


def test_census_n0_total():
    code, text = run("census", "--n", "0")
    assert code == 0
    assert _total(text) == 2


def test_census_needs_n():
    assert run("census")[0] == 1


def test_identical_runs_give_identical_bytes(tmp_path):
    for k in (1, 2):
        assert run("census", "--n", "2", "--json", str(tmp_path / f"a{k}.json"), "--csv", str(tmp_path / f"a{k}.csv"),
                   "--svg", str(tmp_path / f"a{k}.svg"))[0] == 0
    for ext in ("json", "csv", "svg"):
        assert (tmp_path / f"a1.{ext}").read_bytes() == (tmp_path / f"a2.{ext}").read_bytes()


def test_config_merge_flags_win(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 1, "kappa": 0.05}))
    code, text = run("census", "--config", str(cfg), "--n", "2")
    assert code == 0 and "n=2" in text and "kappa=0.05" in text


def test_unknown_config_key_is_usage_error(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 1, "colour": "red"}))
    assert run("census", "--config", str(cfg))[0] == 1


def test_missing_config_is_usage_error(tmp_path):
    assert run("census", "--n", "1", "--config", str(tmp_path / "nope.json"))[0] == 1


def test_bad_flags_exit_1():
    with pytest.raises(SystemExit) as exc:
        main(["census", "--n", "two"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "everything"])
    assert exc.value.code == 1
    assert run("census", "--n", "-1")[0] == 1
    assert run("census", "--n", "1", "--c", "0.5")[0] == 1
    assert run("verify", "--suite", "maslov", "--steps", "4")[0] == 1


def test_io_failure_exit_2(tmp_path):
    assert run("census", "--n", "1", "--json", str(tmp_path / "missing" / "x.json"))[0] == 2


def test_runconfig_merge_rejects_unknown():
    with pytest.raises(UsageError):
        RunConfig.merge({"bogus": 1}, {})
    cfg = RunConfig.merge({"seed": 3, "n": 1}, {"seed": 5, "n": None})
    assert cfg.seed == 5 and cfg.n == 1


def test_verify_lifts_n2():
    code, text = run("verify", "--suite", "lifts", "--n", "2")
    assert code == 0
    assert "number of lifts of u_0" in text and "value=4" in text
    assert text.strip().splitlines()[-1].endswith("checks passed")


def test_verify_all_n0(tmp_path):
    code, text = run("verify", "--suite", "all", "--n", "0", "--json", str(tmp_path / "r.json"))
    assert code == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert all(c["passed"] for c in report["checks"])


def test_verify_moser_at_kappa_002():
    code, text = run("verify", "--suite", "moser", "--kappa", "0.02")
    assert code == 0
    line = next(line for line in text.splitlines() if "pullback residual at 20 points" in line)
    assert float(line.split("value=")[1].split()[0]) < 1e-5


def test_verify_failure_exit_2(capsys):
    # far too few RK4 steps for the step-halving check to pass
    code, _ = run("verify", "--suite", "moser", "--n", "3", "--steps", "16")
    assert code == 2
    assert "verification failed" in capsys.readouterr().err


def test_export_intersections_svg(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    code, text = run("export", "intersections", "--n", "3", "--svg")
    assert code == 0 and text == ""
    svg = (tmp_path / "intersections.svg").read_text()
    assert svg.startswith("<?xml") and "<svg" in svg
    code, text = run("export", "intersections", "--n", "3")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 3
    assert np.allclose([float(r["abs"]) for r in rows], 0.09 ** (1 / 3), atol=1e-12)


def test_export_svg_deterministic(tmp_path):
    for k in (1, 2):
        assert run("export", "disc-boundaries", "--n", "2", "--svg", str(tmp_path / f"b{k}.svg"))[0] == 0
    assert (tmp_path / "b1.svg").read_bytes() == (tmp_path / "b2.svg").read_bytes()


def test_export_hull_n4(capsys):
    code, text = run("export", "hull", "--n", "4")
    assert code == 0
    assert len(text.strip().splitlines()) == 1 + 6
    assert "6 lattice points" in capsys.readouterr().err


def test_export_disc_boundaries_csv(tmp_path):
    path = tmp_path / "b.csv"
    assert run("export", "disc-boundaries", "--n", "1", "--csv", str(path))[0] == 0
    rows = list(csv.DictReader(path.open()))
    assert {r["eps"] for r in rows} == {"-", "+"} and len(rows) == 2 * 256
    x = np.array([complex(float(r["re_x"]), float(r["im_x"])) for r in rows])
    y = np.array([complex(float(r["re_y"]), float(r["im_y"])) for r in rows])
    assert np.max(np.abs(np.abs(x) - np.abs(y))) < 1e-10


def test_export_flow_trace_monotone(tmp_path):
    code, text = run("export", "flow-trace", "--kappa", "0.02", "--n", "1", "--svg", str(tmp_path / "f.svg"),
                     "--csv")
    assert code == 0
    phi = np.array([float(r["phi"]) for r in csv.DictReader(io.StringIO(text))])
    assert phi.size == 129 and np.all(np.diff(phi) <= 1e-9)
    assert (tmp_path / "f.svg").exists()


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "conictori.cli", "census", "--n", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and "total" in res.stdout
