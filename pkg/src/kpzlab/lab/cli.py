"""``kpzlab`` command line: run, verify, compare, plotdata.

Exit status 0 means every check passed, 1 that a check failed, 2 a
configuration or usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .compare import COMPARISON_FIELDS, compare_asep_she, compare_pair, compare_she_goe
from .config import ConfigError, ExperimentConfig, load_config, output_root
from .plots import PLOT_FIELDS, emit_plot_data, render_comparison, render_report
from .records import atomic_write_text, read_ndjson, rows_csv, write_ndjson
from .runner import run_ensemble
from .suites import SUITES, Context, run_suite

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

log = logging.getLogger("kpzlab")


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def _jsonable(o):
    return json.loads(json.dumps(o, default=_json_default))


def _flatten(prefix: str, value, out: list):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, (list, tuple)):
        for i, v in enumerate(value):
            _flatten(f"{prefix}[{i}]", v, out)
    else:
        out.append((prefix, value))


REPORT_FIELDS = ["criterion", "title", "anchor", "check", "passed", "residual", "value"]


def write_report(criteria, directory: Path, meta: dict) -> Path:
    """``report.json`` (nested), ``report.csv`` (one residual per row) and PNG figures."""
    directory.mkdir(parents=True, exist_ok=True)
    doc = {**meta, "passed": all(c.passed for c in criteria), "criteria": [
        {"key": c.key, "title": c.title, "anchor": c.anchor, "passed": c.passed, "seconds": c.seconds,
         "checks": [{"name": k.name, "passed": bool(k.passed), "note": k.note, "residuals": k.residuals}
                    for k in c.checks]}
        for c in criteria]}
    atomic_write_text(directory / "report.json", json.dumps(_jsonable(doc), indent=2) + "\n")
    rows = []
    for c in criteria:
        for k in c.checks:
            flat: list = []
            _flatten("", _jsonable(k.residuals), flat)
            for name, v in flat or [("", "")]:
                rows.append({"criterion": c.key, "title": c.title, "anchor": c.anchor, "check": k.name,
                             "passed": bool(k.passed), "residual": name, "value": v})
    atomic_write_text(directory / "report.csv", rows_csv(REPORT_FIELDS, rows))
    render_report(criteria, directory)
    return directory


def print_criteria(criteria) -> None:
    for c in criteria:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.key:>2} {c.title} [{c.anchor}] ({c.seconds:.1f} s)")
        for k in c.checks:
            print(f"     {'ok  ' if k.passed else 'FAIL'} {k.name}")


def cmd_verify(args) -> int:
    out = output_root(args.out)
    ctx = Context(profile=args.tolerance_profile, seed=args.seed or 0, out=out, workers=args.workers,
                  fault=args.inject_fault)
    criteria = run_suite(args.suite, ctx)
    d = write_report(criteria, out / f"verify-{args.suite}-{args.tolerance_profile}",
                     {"suite": args.suite, "profile": args.tolerance_profile, "seed": ctx.seed})
    print_criteria(criteria)
    print(f"report: {d}")
    return EXIT_PASS if all(c.passed for c in criteria) else EXIT_FAIL


def _kernel_slice(profile: str) -> list[dict]:
    from ..continuum import ContinuumKernel

    ker = ContinuumKernel(-0.5)
    X = [0.0, 0.25, 0.5, 1.0]
    Y = [0.0, 0.25, 0.5, 1.0] if profile == "quick" else [round(0.125 * i, 10) for i in range(13)]
    rows = []
    for T in (0.25, 0.5):
        v, _ = ker(T, X, Y)
        rows += [{"T": T, "X": x, "Y": y, "value": float(v[i, j])} for i, x in enumerate(X) for j, y in enumerate(Y)]
    return rows


def _write_comparison(result: dict, directory: Path) -> None:
    write_ndjson(directory / "comparison.ndjson", result["rows"])
    fields = COMPARISON_FIELDS + (["xi"] if any("xi" in r for r in result["rows"]) else [])
    atomic_write_text(directory / "comparison.csv", rows_csv(fields, result["rows"]))
    atomic_write_text(directory / "trends.json",
                      json.dumps(_jsonable({"passed": result["passed"], "trends": result["trends"]}), indent=2) + "\n")
    render_comparison(result["rows"], directory)
    for t in result["trends"]:
        print(f"{'ok  ' if t['decreasing'] else 'FAIL'} {t['metric']} T={t['T']:g} X={t['X']:g}: "
              + " > ".join(f"{v:.4g}" for v in t["values"]))
    for r in result["rows"]:
        if r["metric"] in ("difference", "allowance"):
            print(f"     T={r['T']:g} xi={r['xi']:g} {r['metric']} {r['value']:.4g}")
    print(f"comparison: {directory}")


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    return cfg.with_(seed=args.seed) if args.seed is not None else cfg


def cmd_run(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    out = output_root(args.out, cfg)
    if cfg.kind == "kernel-verify":
        profile = args.tolerance_profile or cfg.params["profile"]
        criteria = run_suite("kernel", Context(profile=profile, seed=cfg.seed, out=out, workers=args.workers))
        d = out / cfg.tag
        write_report(criteria, d, {"suite": "kernel", "profile": profile, "config_hash": cfg.hash})
        write_ndjson(d / "kernel_slice.ndjson", [{**r, "config_hash": cfg.hash} for r in _kernel_slice(profile)])
        print_criteria(criteria)
        print(f"report: {d}")
        return EXIT_PASS if all(c.passed for c in criteria) else EXIT_FAIL
    if cfg.kind == "compare-asep-she":
        result = compare_asep_she(cfg, out, args.workers)
    elif cfg.kind == "compare-she-goe":
        result = compare_she_goe(cfg, out, args.workers)
    else:
        res = run_ensemble(cfg, out, args.workers)
        print(f"{cfg.tag}: {res.replicas_used} of {cfg.replicas} replicas used"
              + (f", excluded {res.excluded}" if res.excluded else ""))
        for (obs, T, X, xi), s in list(res.summaries.items())[:20]:
            coords = " ".join(f"{k}={v:g}" for k, v in (("T", T), ("X", X), ("xi", xi)) if v is not None)
            print(f"  {obs:8s} {coords:24s} mean {s.mean:.6g}  se {s.se:.3g}  n {s.count}")
        print(f"records: {res.directory}")
        return EXIT_PASS
    _write_comparison(result, out / cfg.tag)
    return EXIT_PASS if result["passed"] else EXIT_FAIL


def cmd_compare(args) -> int:
    a = _apply_overrides(load_config(args.config_a), args)
    b = _apply_overrides(load_config(args.config_b), args)
    out = output_root(args.out, a)
    result = compare_pair(a, b, out, args.workers)
    _write_comparison(result, out / f"compare-{a.hash[:8]}-{b.hash[:8]}")
    return EXIT_PASS if result["passed"] else EXIT_FAIL


def _load_records(path: Path) -> list[dict]:
    if path.is_dir():
        for name in ("records.ndjson", "comparison.ndjson", "kernel_slice.ndjson"):
            if (path / name).exists():
                return read_ndjson(path / name)
        raise ConfigError(f"{path} holds no records")
    if not path.exists():
        raise ConfigError(f"{path} does not exist")
    try:
        return read_ndjson(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not NDJSON ({exc.msg})") from None


def cmd_plotdata(args) -> int:
    text = emit_plot_data(_load_records(Path(args.records)), args.kind)
    if args.out:
        p = Path(args.out)
        p = p / f"plotdata-{args.kind}.csv" if p.suffix != ".csv" else p
        atomic_write_text(p, text)
        print(p)
    else:
        sys.stdout.write(text)
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="master seed (overrides the config)")
    common.add_argument("--workers", type=int, default=None, help="worker processes (default: all cores)")
    common.add_argument("--out", default=None, help="output root (overrides config and KPZLAB_OUT)")
    common.add_argument("--tolerance-profile", choices=("quick", "full"), default=None,
                        help="ensemble sizes for statistical checks")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="kpzlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", parents=[common], help="run one experiment config")
    r.add_argument("config")
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=sorted(SUITES))
    v.add_argument("--inject-fault", metavar="ROUTE", default=None,
                   help="perturb mu_A in one kernel route (sensitivity test of the route check)")
    v.set_defaults(func=cmd_verify)
    c = sub.add_parser("compare", parents=[common], help="compare two ensemble configs")
    c.add_argument("config_a")
    c.add_argument("config_b")
    c.set_defaults(func=cmd_compare)
    d = sub.add_parser("plotdata", parents=[common], help="tidy CSV from records")
    d.add_argument("records", help="NDJSON file or run directory")
    d.add_argument("kind", choices=sorted(PLOT_FIELDS))
    d.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_PASS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "verify" and args.tolerance_profile is None:
        args.tolerance_profile = "full"
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"kpzlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
