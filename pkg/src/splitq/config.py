"""CLI configuration file: small JSON with strict keys."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError

DEFAULT_HIST = "hist:100:0.0:200.0"


@dataclass(frozen=True)
class Config:
    data_dir: str | None = None
    default_hist: str = DEFAULT_HIST
    bench_repetitions: int = 3
    sim_workers: int = 4
    sim_cache_mb: float = 64.0
    sim_policy: str = "two-round-pull"

    @classmethod
    def load(cls, path: str | None) -> "Config":
        if path is None:
            return cls()
        try:
            obj = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict):
            raise ConfigError("config file must contain a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)
