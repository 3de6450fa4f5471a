"""Replica records (NDJSON), mergeable summaries and atomic file output."""
from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable


@dataclass
class Summary:
    """Count, mean and centred sum of squares; ``merge`` is Chan's pairwise update."""

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: Iterable[float]) -> "Summary":
        s = cls()
        for v in values:
            s.push(float(v))
        return s

    def push(self, v: float) -> None:
        self.count += 1
        d = v - self.mean
        self.mean += d / self.count
        self.m2 += d * (v - self.mean)

    def merge(self, other: "Summary") -> "Summary":
        n = self.count + other.count
        if n == 0:
            return Summary()
        d = other.mean - self.mean
        mean = self.mean + d * other.count / n
        m2 = self.m2 + other.m2 + d * d * self.count * other.count / n
        return Summary(n, mean, m2)

    @property
    def variance(self) -> float:
        return self.m2 / (self.count - 1) if self.count > 1 else math.nan

    @property
    def se(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count > 1 else math.nan


def dumps(record: dict) -> str:
    """One NDJSON line; floats use ``repr`` so reruns are byte-identical."""
    return json.dumps(record, separators=(",", ":"), allow_nan=True)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_ndjson(path, records: Iterable[dict]) -> None:
    atomic_write_text(path, "".join(dumps(r) + "\n" for r in records))


def read_ndjson(path) -> list[dict]:
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


SUMMARY_FIELDS = ["observable", "T", "X", "xi", "count", "mean", "variance", "se"]


def summarize(records: Iterable[dict]) -> dict[tuple, Summary]:
    """Group scalar records by ``(observable, T, X, xi)`` in first-seen order."""
    out: dict[tuple, Summary] = {}
    for r in records:
        v = r.get("value")
        if not isinstance(v, (int, float)) or r.get("status"):
            continue
        key = (r["observable"], r.get("T"), r.get("X"), r.get("xi"))
        out.setdefault(key, Summary()).push(float(v))
    return out


def summary_csv(summaries: dict[tuple, Summary]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_FIELDS)
    for (obs, T, X, xi), s in summaries.items():
        w.writerow([obs, _fmt(T), _fmt(X), _fmt(xi), s.count, repr(s.mean), repr(s.variance), repr(s.se)])
    return buf.getvalue()


def _fmt(v) -> str:
    return "" if v is None else repr(v)


def rows_csv(fields: list[str], rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()
