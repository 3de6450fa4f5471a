import json

import pytest

from kpzlab.lab.cli import main
from kpzlab.lab.records import read_ndjson

SHE = {"schema": "kpzlab-config/1", "kind": "she-ensemble",
       "params": {"A": -0.5, "dx": 0.05, "X_max": 2.0, "T": [0.1], "X": [0.0, 0.2]},
       "replicas": 8, "seed": 1}


def _write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_verify_kernel_quick_passes(tmp_path):
    assert main(["verify", "kernel", "--tolerance-profile", "quick", "--out", str(tmp_path)]) == 0
    d = tmp_path / "verify-kernel-quick"
    report = json.loads((d / "report.json").read_text())
    assert report["passed"] and all(c["anchor"] for c in report["criteria"])
    assert (d / "report.csv").read_text().startswith("criterion,title,anchor,check,passed,residual,value")
    assert (d / "status.png").stat().st_size > 0


def test_injected_fault_is_detected(tmp_path):
    code = main(["verify", "kernel", "--tolerance-profile", "quick", "--out", str(tmp_path),
                 "--inject-fault", "ode-oracle"])
    assert code == 1
    report = json.loads((tmp_path / "verify-kernel-quick" / "report.json").read_text())
    route = report["criteria"][0]
    assert not route["passed"] and route["checks"][0]["residuals"]["max_gap"] > 1e-8


def test_config_errors_exit_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.json")]) == 2
    bad = _write(tmp_path, "bad.json", {**SHE, "params": {**SHE["params"], "dx": -1}})
    assert main(["run", bad]) == 2
    assert "dx" in capsys.readouterr().err
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["run", str(tmp_path / "junk.json")]) == 2
    assert main(["frobnicate"]) == 2


def test_run_seed_override_and_env_out(tmp_path, monkeypatch):
    cfg = _write(tmp_path, "she.json", SHE)
    monkeypatch.setenv("KPZLAB_OUT", str(tmp_path / "env"))
    assert main(["run", cfg]) == 0
    assert main(["run", cfg, "--seed", "9", "--out", str(tmp_path / "cli")]) == 0
    env_runs = list((tmp_path / "env").iterdir())
    cli_runs = list((tmp_path / "cli").iterdir())
    assert len(env_runs) == 1 and len(cli_runs) == 1 and env_runs[0].name != cli_runs[0].name
    recs = read_ndjson(cli_runs[0] / "records.ndjson")
    assert {r["seed"] for r in recs} == {9}


def test_plotdata(tmp_path, capsys):
    cfg = _write(tmp_path, "she.json", SHE)
    main(["run", cfg, "--out", str(tmp_path)])
    run_dir = next(p for p in tmp_path.iterdir() if p.is_dir())
    capsys.readouterr()
    assert main(["plotdata", str(run_dir), "onepoint"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "observable,T,X,xi,replica,value" and len(lines) == 1 + 8 * 2 * 2
    empty = tmp_path / "empty.ndjson"
    empty.write_text("")
    assert main(["plotdata", str(empty), "comparison", "--out", str(tmp_path / "pd")]) == 0
    assert (tmp_path / "pd" / "plotdata-comparison.csv").read_text() == "epsilon,T,X,metric,value\n"
    assert main(["plotdata", str(tmp_path / "nothing.ndjson"), "onepoint"]) == 2


def test_compare_pair_she_goe(tmp_path):
    she = _write(tmp_path, "she.json", {**SHE, "params": {**SHE["params"], "init": "delta0", "T": [0.2]}})
    goe = _write(tmp_path, "goe.json", {"schema": "kpzlab-config/1", "kind": "goe",
                                         "params": {"n": 300, "k": 8, "xi": [1.0]}, "replicas": 8})
    code = main(["compare", she, goe, "--out", str(tmp_path / "o")])
    assert code in (0, 1)
    cmp_dir = next((tmp_path / "o").glob("compare-*"))
    assert (cmp_dir / "comparison.png").exists()
    assert (cmp_dir / "comparison.csv").read_text().startswith("epsilon,T,X,metric,value,xi")


def test_compare_rejects_mismatched_kinds(tmp_path):
    a = _write(tmp_path, "a.json", SHE)
    b = _write(tmp_path, "b.json", {"schema": "kpzlab-config/1", "kind": "kernel-verify", "params": {}})
    assert main(["compare", a, b, "--out", str(tmp_path)]) == 2
