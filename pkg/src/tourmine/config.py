"""Run configuration: one flat key=value file plus CLI flag overrides.

Defaults mirror the experiment protocol the bench reproduces: 10 clusters,
support sweep 0.02-0.10, 30 evolutionary runs, 70/30 split, 5 folds.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields

from .errors import MalformedRow

DEFAULT_THRESHOLDS = (0.02, 0.04, 0.06, 0.08, 0.10)


@dataclass
class RunConfig:
    places: str = "places.csv"
    visitors: str = "visitors.csv"
    transactions: str = "transactions.csv"
    clusters: str = "clusters.csv"
    out: str = "out"
    k: int = 10
    min_support: tuple[float, ...] = DEFAULT_THRESHOLDS
    min_conf: float = 0.5
    alpha: float = 0.7
    seed: int = 42
    folds: int = 5
    train_fraction: float = 0.70
    runs: int = 30
    evo_population: int = 40
    evo_generations: int = 50
    evo_mutation_rate: float = 0.02
    evo_crossover_rate: float = 0.8
    days: int = 3
    per_day: int = 4
    start_lat: float | None = None
    start_lon: float | None = None
    visitor: int = 1
    top_n: int = 10
    n_visitors: int = 5000
    n_events: int = 10000
    synth_places: int = 232
    category_weight: float = 1.0
    kmeans_tol: float = 1e-6
    kmeans_max_iter: int = 300

    def path(self, name: str) -> str:
        """Resolve a configured file path; bare names live in the out dir."""
        value = getattr(self, name)
        if os.path.isabs(value) or os.sep in value:
            return value
        return os.path.join(self.out, value)

    def start_point(self):
        if self.start_lat is None or self.start_lon is None:
            return None
        return (self.start_lat, self.start_lon)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                v = ""
            elif isinstance(v, tuple):
                v = ",".join(str(x) for x in v)
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"


def _parse_value(name: str, text: str, kind):
    text = text.strip()
    if kind == "thresholds":
        return tuple(float(x) for x in text.split(",") if x.strip())
    if kind == "optional_float":
        return float(text) if text else None
    if kind is int:
        return int(text)
    if kind is float:
        return float(text)
    return text


_FIELD_KINDS = {
    "min_support": "thresholds",
    "start_lat": "optional_float",
    "start_lon": "optional_float",
}


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base or RunConfig()
    known = {f.name: f.type for f in fields(RunConfig)}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MalformedRow(f"config line {line_no}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in known:
            raise MalformedRow(f"config line {line_no}: unknown key {key!r}")
        kind = _FIELD_KINDS.get(key)
        if kind is None:
            kind = type(getattr(RunConfig(), key))
        setattr(cfg, key, _parse_value(key, value, kind))
    return cfg


def load_config(path, base: RunConfig | None = None) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base)
