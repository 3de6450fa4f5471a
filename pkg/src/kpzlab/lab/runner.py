"""Chunked, resumable, worker-count independent ensemble execution.

Layout of one run under the output root::

    <kind>-<hash12>/config.json       canonical config
    <kind>-<hash12>/chunks/c<start>.ndjson
    <kind>-<hash12>/records.ndjson    chunks concatenated in replica order
    <kind>-<hash12>/summary.csv

Chunks have fixed replica ranges and are written with an atomic rename, so
an interrupted run resumes by recomputing only the missing chunks.
"""
from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .config import ExperimentConfig
from .experiments import BLOCKS
from .records import Summary, atomic_write_text, read_ndjson, summarize, summary_csv, write_ndjson

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: ExperimentConfig
    directory: Path
    records: list[dict]
    summaries: dict[tuple, Summary]
    excluded: dict[str, int]

    @property
    def replicas_used(self) -> int:
        return self.config.replicas - sum(self.excluded.values())

    def values(self, observable: str, T=None, X=None, xi=None) -> list:
        """Per-replica values of one observable at one coordinate, in replica order."""
        return [r["value"] for r in self.records
                if r.get("observable") == observable and r.get("T") == T and r.get("X") == X
                and r.get("xi") == xi]


def _chunk_job(args) -> str:
    cfg, start, stop, path = args
    write_ndjson(path, BLOCKS[cfg.kind](cfg, start, stop))
    return path


def default_workers() -> int:
    return os.cpu_count() or 1


def run_ensemble(cfg: ExperimentConfig, out_root, workers: int | None = None,
                 stop_after: int | None = None) -> RunResult | None:
    """Run (or resume) an ensemble; ``stop_after`` chunks simulates an interruption."""
    if cfg.kind not in BLOCKS:
        raise ValueError(f"{cfg.kind} is not an ensemble kind")
    workers = workers or default_workers()
    d = Path(out_root) / cfg.tag
    chunk_dir = d / "chunks"
    chunk_dir.mkdir(parents=True, exist_ok=True)
    atomic_write_text(d / "config.json", json.dumps(cfg.canonical(), indent=2, sort_keys=True) + "\n")
    starts = list(range(0, cfg.replicas, cfg.chunk))
    paths = [str(chunk_dir / f"c{s:08d}-{min(s + cfg.chunk, cfg.replicas):08d}.ndjson") for s in starts]
    todo = [(cfg, s, min(s + cfg.chunk, cfg.replicas), p) for s, p in zip(starts, paths)
            if not os.path.exists(p)]
    if stop_after is not None:
        todo = todo[:stop_after]
    log.info("%s: %d of %d chunks to compute", cfg.tag, len(todo), len(paths))
    if workers == 1 or len(todo) <= 1:
        for job in todo:
            _chunk_job(job)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_chunk_job, todo))
    if not all(os.path.exists(p) for p in paths):
        return None
    records = [r for p in paths for r in read_ndjson(p)]
    write_ndjson(d / "records.ndjson", records)
    summaries = summarize(records)
    excluded: dict[str, int] = {}
    for r in records:
        if r.get("status"):
            excluded[r["status"]] = excluded.get(r["status"], 0) + 1
    atomic_write_text(d / "summary.csv", summary_csv(summaries))
    if excluded:
        log.warning("%s: excluded replicas %s", cfg.tag, excluded)
    return RunResult(cfg, d, records, summaries, excluded)
