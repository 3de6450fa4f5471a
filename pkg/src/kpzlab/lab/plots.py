"""Tidy plot data (CSV, no rendering) and the PNG figures of verify/compare reports."""
from __future__ import annotations

import math
from pathlib import Path

from .records import atomic_write_text, rows_csv

PLOT_FIELDS = {
    "onepoint": ["observable", "T", "X", "xi", "replica", "value"],
    "kernel": ["T", "X", "Y", "value"],
    "comparison": ["epsilon", "T", "X", "metric", "value"],
    "summary": ["observable", "T", "X", "xi", "count", "mean", "variance", "se"],
}


def emit_plot_data(records, kind: str) -> str:
    """One observation per row; an empty input gives the header alone."""
    if kind not in PLOT_FIELDS:
        raise ValueError(f"unknown plot-data kind {kind!r}; choose from {sorted(PLOT_FIELDS)}")
    fields = PLOT_FIELDS[kind]
    if kind == "summary":
        from .records import summarize

        rows = [{"observable": o, "T": T, "X": X, "xi": xi, "count": s.count, "mean": s.mean,
                 "variance": s.variance, "se": s.se} for (o, T, X, xi), s in summarize(records).items()]
    elif kind == "onepoint":
        rows = [r for r in records if isinstance(r.get("value"), (int, float)) and not r.get("status")]
    else:
        rows = [r for r in records if all(f in r for f in fields)]
    return rows_csv(fields, rows)


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    _pyplot().close(fig)
    return path


def _residual(crit, idx: int) -> dict:
    return crit.checks[idx].residuals if idx < len(crit.checks) else {}


def _fig_criterion_4(crit, ax):
    C = _residual(crit, 2).get("C_by_N") or {}
    if C:
        Ns = sorted(int(n) for n in C)
        ax.plot(Ns, [C[n] if n in C else C[str(n)] for n in Ns], "o-")
        ax.set_xscale("log")
        ax.set_xlabel("N")
        ax.set_ylabel("N^2 x largest positive eigenvalue")


def _fig_criterion_6(crit, ax):
    rel = next((c.residuals["relative_deviation"] for c in crit.checks if "relative_deviation" in c.residuals), None)
    if rel:
        pts = sorted((float(k), v) for k, v in rel.items())
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("bracket relative deviation")


def _fig_criterion_7(crit, ax):
    for name, lad in _residual(crit, 2).items():
        if isinstance(lad, dict) and "dt" in lad:
            ax.loglog(lad["dt"], lad["gap"], "o-", label=name)
    if ax.has_data():
        ax.set_xlabel("dt")
        ax.set_ylabel("Volterra vs exact relative gap")
        ax.legend(fontsize=7)


def _fig_criterion_9(crit, ax):
    ladder = _residual(crit, 0).get("ladder")
    if ladder:
        eps = [r["epsilon"] for r in ladder]
        ax.plot(eps, [r["gap"] for r in ladder], "o-", label="|mean - P_T(X,0)|")
        ax.plot(eps, [r["ks"] for r in ladder], "s-", label="KS vs SHE")
        ax.set_xscale("log")
        ax.set_xlabel("epsilon")
        ax.legend()


def _fig_criterion_10(crit, ax):
    rows = _residual(crit, 2).get("rows")
    if rows:
        xi = [r["xi"] for r in rows]
        ax.errorbar(xi, [r["she"] for r in rows], yerr=[r["she_mc"] for r in rows], fmt="o", label="SHE")
        ax.errorbar(xi, [r["goe"] for r in rows], yerr=[r["goe_mc"] for r in rows], fmt="s", label="GOE product")
        ax.set_xlabel("xi")
        ax.set_ylabel("Laplace functional at T = 1")
        ax.legend()


FIGURES = {"4": _fig_criterion_4, "6": _fig_criterion_6, "7": _fig_criterion_7, "9": _fig_criterion_9,
           "10": _fig_criterion_10}


def render_report(criteria, directory) -> list[Path]:
    """A summary bar chart plus one figure per criterion that has a ladder to show."""
    plt = _pyplot()
    directory = Path(directory)
    paths = []
    fig, ax = plt.subplots(figsize=(max(4, 0.6 * len(criteria) + 2), 3))
    ax.bar([c.key for c in criteria], [1] * len(criteria),
           color=["tab:green" if c.passed else "tab:red" for c in criteria])
    ax.set_yticks([])
    ax.set_xlabel("criterion")
    ax.set_title("pass (green) / fail (red)")
    paths.append(_save(fig, directory / "status.png"))
    for c in criteria:
        draw = FIGURES.get(c.key)
        if draw is None:
            continue
        fig, ax = plt.subplots(figsize=(5, 3.5))
        draw(c, ax)
        ax.set_title(c.title)
        if ax.has_data():
            paths.append(_save(fig, directory / f"criterion-{c.key}.png"))
        else:
            plt.close(fig)
    return paths


def render_comparison(rows: list[dict], directory) -> list[Path]:
    """Metric against epsilon per ``(T, X)``, or the Laplace table against xi."""
    plt = _pyplot()
    directory = Path(directory)
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    series: dict[tuple, list] = {}
    if any("xi" in r for r in rows):
        for r in rows:
            if r["metric"] in ("she", "goe"):
                series.setdefault((r["metric"], r["T"]), []).append((r["xi"], r["value"]))
        for (m, T), pts in series.items():
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"{m} T={T:g}")
        ax.set_xlabel("xi")
    else:
        for r in rows:
            if r["epsilon"] > 0 and r["metric"] in ("mean_diff", "ks", "nw_mean_gap") and math.isfinite(r["value"]):
                series.setdefault((r["metric"], r["T"], r["X"]), []).append((r["epsilon"], r["value"]))
        for (m, T, X), pts in series.items():
            pts.sort()
            ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"{m} T={T:g} X={X:g}")
        ax.set_xscale("log")
        ax.set_xlabel("epsilon")
    if series:
        ax.legend(fontsize=7)
    return [_save(fig, directory / "comparison.png")]


def write_plot_data(records, kind: str, path) -> None:
    atomic_write_text(path, emit_plot_data(records, kind))
