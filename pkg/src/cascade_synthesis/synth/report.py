"""Per-seed experiment records with seed-averaged summaries."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .. import __version__


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        s = format(float(x), ".12g")
        return "0" if s == "-0" else s
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    return x


@dataclass
class ExperimentReport:
    """One record per (seed, n); the summary never replaces the records.

    ``value`` names the record field that is averaged (``"tv"`` by default).
    """

    kind: str
    config: dict
    records: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    value: str = "tv"

    def add(self, seed: int, n: int, **fields) -> None:
        self.records.append({"seed": int(seed), "n": int(n), **fields})

    @property
    def n_values(self) -> list[int]:
        return sorted({r["n"] for r in self.records})

    def values(self, n: int) -> np.ndarray:
        return np.array([r[self.value] for r in self.records if r["n"] == n], dtype=float)

    def seeds(self, n: int) -> list[int]:
        return [r["seed"] for r in self.records if r["n"] == n]

    def mean(self, n: int) -> float:
        return float(self.values(n).mean())

    def means(self) -> np.ndarray:
        return np.array([self.mean(n) for n in self.n_values])

    def stderr(self, n: int) -> float:
        v = self.values(n)
        return float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0

    def summary(self) -> list[dict]:
        """Mean, standard error, best and median seed for every n."""
        out = []
        for n in self.n_values:
            v, s = self.values(n), self.seeds(n)
            order = np.argsort(v, kind="stable")
            out.append(
                {
                    "n": n,
                    "trials": len(v),
                    "mean": float(v.mean()),
                    "stderr": self.stderr(n),
                    "best_seed": s[order[0]],
                    "best": float(v[order[0]]),
                    "median_seed": s[order[(len(v) - 1) // 2]],
                    "median": float(v[order[(len(v) - 1) // 2]]),
                }
            )
        return out

    def to_dict(self) -> dict:
        return _jsonable(
            {
                "kind": self.kind,
                "version": __version__,
                "config": self.config,
                "metadata": self.metadata,
                "records": self.records,
                "summary": self.summary(),
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    def to_csv(self) -> str:
        """Flat table, one row per (seed, n); config and version ride along in columns."""
        keys: list[str] = []
        for r in self.records:
            keys += [k for k in r if k not in keys]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(keys + ["kind", "version", "config"])
        cfg = json.dumps(_jsonable(self.config), sort_keys=True, separators=(",", ":"))
        for r in self.records:
            w.writerow([_fmt(r.get(k, "")) for k in keys] + [self.kind, __version__, cfg])
        return buf.getvalue()
