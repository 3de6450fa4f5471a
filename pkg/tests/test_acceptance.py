"""Acceptance criteria 1-10 at full size, one test and one PASS/FAIL line each.

Ensembles go to a fresh temporary directory so the runtime checks time real
work; set KPZLAB_ACCEPTANCE_OUT to keep (and resume from) a persistent one,
in which case those checks only time what was left to compute.
Runs standalone too: ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import json
import os
import sys
import tempfile
from pathlib import Path

import pytest

from kpzlab.lab.suites import CRITERIA, Context

KEYS = [str(k) for k in range(1, 11)]


def _headline(crit) -> str:
    failed = [c.name for c in crit.checks if not c.passed]
    detail = "all checks pass" if not failed else "failed: " + "; ".join(failed)
    return f"{'PASS' if crit.passed else 'FAIL'} criterion {crit.key}: {crit.title} ({crit.seconds:.0f} s) {detail}"


def _dump(crit, out: Path) -> None:
    doc = {"key": crit.key, "title": crit.title, "anchor": crit.anchor, "passed": crit.passed,
           "seconds": crit.seconds,
           "checks": [{"name": c.name, "passed": bool(c.passed), "note": c.note, "residuals": c.residuals}
                      for c in crit.checks]}
    out.mkdir(parents=True, exist_ok=True)
    (out / f"criterion-{crit.key}.json").write_text(json.dumps(doc, indent=2, default=_plain) + "\n")


def _plain(o):
    return o.item() if hasattr(o, "item") else str(o)


@pytest.fixture(scope="module")
def ctx(tmp_path_factory):
    out = os.environ.get("KPZLAB_ACCEPTANCE_OUT")
    root = Path(out) if out else tmp_path_factory.mktemp("acceptance")
    return Context(profile="full", seed=0, out=root, workers=1)


@pytest.mark.slow
@pytest.mark.parametrize("key", KEYS)
def test_criterion(key, ctx, acceptance_lines):
    crit = CRITERIA[key](ctx)
    _dump(crit, ctx.out / "criteria")
    line = _headline(crit)
    acceptance_lines.append(line)
    print(line)
    for c in crit.checks:
        print(f"    {'ok  ' if c.passed else 'FAIL'} {c.name}: {json.dumps(c.residuals, default=_plain)[:400]}")
    assert crit.passed, line


if __name__ == "__main__":
    root = Path(os.environ.get("KPZLAB_ACCEPTANCE_OUT") or tempfile.mkdtemp(prefix="kpzlab-acceptance-"))
    context = Context(profile="full", seed=0, out=root, workers=1)
    ok = True
    for k in (sys.argv[1:] or KEYS):
        crit = CRITERIA[k](context)
        _dump(crit, root / "criteria")
        print(_headline(crit), flush=True)
        ok &= crit.passed
    sys.exit(0 if ok else 1)
