"""Residual reports: per-sample records plus a summary, written as CSV + JSON."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("tag", "s", "theta", "value", "normalized")


@dataclass
class ResidualReport:
    """Records are dicts with keys ``s``, ``theta`` (list of floats),
    ``value``, ``normalized`` and ``tag`` (which path produced the value)."""

    records: list = field(default_factory=list)
    normalization: float = 1.0
    weight_bounds: tuple | None = None
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def add(self, s, theta, value, normalized, tag):
        self.records.append({
            "s": float(s),
            "theta": [float(t) for t in np.atleast_1d(theta)],
            "value": float(value),
            "normalized": float(normalized),
            "tag": str(tag),
        })

    def values(self, tag=None):
        return np.array([r["normalized"] for r in self.records if tag is None or r["tag"] == tag])

    def max(self, tag=None):
        v = self.values(tag)
        return float(np.max(np.abs(v))) if v.size else 0.0

    def mean(self, tag=None):
        v = self.values(tag)
        return float(np.mean(np.abs(v))) if v.size else 0.0

    def tags(self):
        return sorted({r["tag"] for r in self.records})

    def summary(self):
        out = {
            "max": self.max(),
            "mean": self.mean(),
            "count": len(self.records),
            "normalization": self.normalization,
            "weight_bounds": list(self.weight_bounds) if self.weight_bounds is not None else None,
            "wall_time": self.wall_time,
            "per_tag_max": {t: self.max(t) for t in self.tags()},
        }
        out.update(self.extra)
        return out

    def write_csv(self, path):
        """Deterministic CSV (no timings); floats written with repr."""
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(CSV_COLUMNS)
            for r in self.records:
                wr.writerow([
                    r["tag"], repr(r["s"]), " ".join(repr(t) for t in r["theta"]),
                    repr(r["value"]), repr(r["normalized"]),
                ])

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(_jsonable(self.summary()), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write(self, out_dir, stem):
        self.write_csv(out_dir / f"{stem}.csv")
        self.write_json(out_dir / f"{stem}.json")

    @classmethod
    def load(cls, csv_path, json_path=None):
        """Rebuild a report; the summary max is recomputed from the records."""
        rep = cls()
        with open(csv_path, newline="") as fh:
            rd = csv.DictReader(fh)
            for row in rd:
                theta = [float(t) for t in row["theta"].split()] if row["theta"] else []
                rep.add(float(row["s"]), theta, float(row["value"]), float(row["normalized"]), row["tag"])
        if json_path is not None:
            with open(json_path) as fh:
                meta = json.load(fh)
            rep.normalization = meta.get("normalization", 1.0)
            wb = meta.get("weight_bounds")
            rep.weight_bounds = tuple(wb) if wb is not None else None
            rep.wall_time = meta.get("wall_time", 0.0)
        return rep


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj
