import json
import random

import numpy as np
import pytest

from kpzlab.lab.compare import _check_panels, trend_checks
from kpzlab.lab.config import ConfigError, ExperimentConfig, output_root, parse_config
from kpzlab.lab.plots import emit_plot_data
from kpzlab.lab.records import Summary, read_ndjson, summarize
from kpzlab.lab.runner import run_ensemble

ASEP = {"schema": "kpzlab-config/1", "kind": "asep-ensemble",
        "params": {"epsilon": 0.1, "A": -0.5, "normalization": "narrow-wedge", "T": [0.5], "X": [0.2]},
        "replicas": 40, "seed": 3, "chunk": 16}
SHE = {"schema": "kpzlab-config/1", "kind": "she-ensemble",
       "params": {"A": -0.5, "dx": 0.05, "X_max": 2.0, "T": [0.1, 0.2], "X": [0.0, 0.2]},
       "replicas": 12, "seed": 1, "chunk": 5}


def test_config_defaults_and_hash_stability():
    a = parse_config(ASEP)
    assert a.params["geometry"] == "half-line" and a.params["init"] == "empty"
    # frozen digest of the canonical config; changes only if the canonical form changes
    assert a.hash == parse_config(json.loads(json.dumps(ASEP))).hash
    b = parse_config({**ASEP, "chunk": 7, "out": "elsewhere"})
    assert a.hash == b.hash
    c = parse_config({**ASEP, "seed": 4})
    assert a.hash != c.hash
    assert a.tag.startswith("asep-ensemble-") and len(a.tag) == len("asep-ensemble-") + 12


def test_hash_ignores_key_order():
    shuffled = dict(reversed(list(ASEP.items())))
    shuffled["params"] = dict(reversed(list(ASEP["params"].items())))
    assert parse_config(shuffled).hash == parse_config(ASEP).hash


@pytest.mark.parametrize("bad,where", [
    ({**ASEP, "schema": "kpzlab-config/0"}, "schema"),
    ({**ASEP, "kind": "nope"}, "kind"),
    ({**ASEP, "params": {**ASEP["params"], "epsilon": -1}}, "epsilon"),
    ({**ASEP, "params": {**ASEP["params"], "extra": 1}}, "extra"),
    ({**ASEP, "replicas": -1}, "replicas"),
    ({**SHE, "params": {**SHE["params"], "geometry": "interval"}}, "B"),
    ({"schema": "kpzlab-config/1", "kind": "goe", "params": {"n": 300, "k": 300}}, "k"),
])
def test_schema_errors(bad, where):
    with pytest.raises(ConfigError, match=where):
        parse_config(bad)


def test_output_root_precedence(monkeypatch):
    cfg = parse_config({**ASEP, "out": "from-config"})
    monkeypatch.setenv("KPZLAB_OUT", "from-env")
    assert str(output_root("from-cli", cfg)) == "from-cli"
    assert str(output_root(None, cfg)) == "from-config"
    assert str(output_root(None, parse_config(ASEP))) == "from-env"
    monkeypatch.delenv("KPZLAB_OUT")
    assert str(output_root(None, None)) == "kpzlab-out"


def test_summary_merge_associative_and_commutative():
    rng = random.Random(0)
    xs = [rng.gauss(0, 1) for _ in range(300)]
    parts = [Summary.of(xs[:50]), Summary.of(xs[50:170]), Summary.of(xs[170:])]
    whole = Summary.of(xs)
    left = parts[0].merge(parts[1]).merge(parts[2])
    right = parts[0].merge(parts[1].merge(parts[2]))
    swapped = parts[2].merge(parts[0]).merge(parts[1])
    for s in (left, right, swapped):
        assert s.count == whole.count
        assert s.mean == pytest.approx(whole.mean, rel=1e-12)
        assert s.variance == pytest.approx(whole.variance, rel=1e-12)
    assert Summary().merge(Summary()).count == 0
    assert np.isnan(Summary.of([1.0]).se)


def test_summarize_skips_status_and_none():
    recs = [{"observable": "Z", "T": 1.0, "X": 0.0, "value": 2.0}, {"status": "overflow"},
            {"observable": "H", "T": 1.0, "X": 0.0, "value": None}]
    s = summarize(recs)
    assert list(s) == [("Z", 1.0, 0.0, None)] and s[("Z", 1.0, 0.0, None)].count == 1


def test_empty_ensemble(tmp_path):
    res = run_ensemble(parse_config({**ASEP, "replicas": 0}), tmp_path, workers=1)
    assert res.records == [] and res.replicas_used == 0
    assert (res.directory / "summary.csv").read_text().splitlines() == \
        ["observable,T,X,xi,count,mean,variance,se"]


def _payloads(d):
    return {p.name: p.read_bytes() for p in sorted((d / "chunks").iterdir())} | \
        {"records": (d / "records.ndjson").read_bytes(), "summary": (d / "summary.csv").read_bytes()}


@pytest.mark.parametrize("raw", [ASEP, SHE], ids=["asep", "she"])
def test_rerun_byte_identical_and_worker_independent(raw, tmp_path):
    cfg = parse_config(raw)
    a = run_ensemble(cfg, tmp_path / "a", workers=1)
    b = run_ensemble(cfg, tmp_path / "b", workers=1)
    c = run_ensemble(cfg, tmp_path / "c", workers=2)
    pa = _payloads(a.directory)
    assert pa == _payloads(b.directory) == _payloads(c.directory)
    # chunk size does not change replica payloads
    d = run_ensemble(cfg.with_(chunk=40), tmp_path / "d", workers=1)
    assert (d.directory / "records.ndjson").read_bytes() == pa["records"]
    assert all(r["config_hash"] == cfg.hash for r in a.records)


def test_resume_after_interruption(tmp_path):
    cfg = parse_config(ASEP)
    assert run_ensemble(cfg, tmp_path / "r", workers=1, stop_after=1) is None
    assert len(list((tmp_path / "r" / cfg.tag / "chunks").iterdir())) == 1
    resumed = run_ensemble(cfg, tmp_path / "r", workers=1)
    full = run_ensemble(cfg, tmp_path / "f", workers=1)
    assert (resumed.directory / "records.ndjson").read_bytes() == (full.directory / "records.ndjson").read_bytes()


def test_overflow_replicas_excluded_and_counted(tmp_path):
    # a window that is too small for T forces overflow on every replica
    from kpzlab.lab import experiments

    cfg = parse_config(ASEP)
    orig = experiments.simulate_replica

    def tiny(s, init, t_grid, x_obs, seed, replica, **kw):
        return orig(s, init, t_grid, x_obs, seed, replica, L=4, **kw)

    experiments.simulate_replica = tiny
    try:
        res = run_ensemble(cfg.with_(replicas=5, chunk=5), tmp_path, workers=1)
    finally:
        experiments.simulate_replica = orig
    assert res.excluded == {"overflow": 5} and res.replicas_used == 0


def test_plot_data_shapes():
    assert emit_plot_data([], "onepoint") == "observable,T,X,xi,replica,value\n"
    assert emit_plot_data([], "comparison") == "epsilon,T,X,metric,value\n"
    kern = [{"T": 0.5, "X": 0.1, "Y": 0.2, "value": 1.5, "config_hash": "x"}]
    assert emit_plot_data(kern, "kernel").splitlines() == ["T,X,Y,value", "0.5,0.1,0.2,1.5"]
    cmp_rows = [{"epsilon": 0.1, "T": 0.5, "X": 0.2, "metric": "ks", "value": 0.05}]
    assert emit_plot_data(cmp_rows, "comparison").splitlines()[1] == "0.1,0.5,0.2,ks,0.05"
    with pytest.raises(ValueError):
        emit_plot_data([], "nope")


def test_panels_must_match():
    a = parse_config(ASEP).params
    s = parse_config({**SHE, "params": {**SHE["params"], "T": [0.5], "X": [0.2]}}).params
    _check_panels(a, s)
    with pytest.raises(ConfigError, match="mismatched"):
        _check_panels(a, {**s, "A": 0.0})
    with pytest.raises(ConfigError, match="mismatched"):
        _check_panels(a, {**s, "X": [0.3]})
    with pytest.raises(ConfigError, match="mismatched"):
        _check_panels(a, {**s, "init": "flat"})


def test_trend_checks():
    rows = [{"epsilon": e, "T": 0.5, "X": 0.2, "metric": "ks", "value": v} for e, v in ((0.1, 0.3), (0.05, 0.2), (0.025, 0.1))]
    assert trend_checks(rows)[0]["decreasing"]
    rows[2]["value"] = 0.25
    assert not trend_checks(rows)[0]["decreasing"]
