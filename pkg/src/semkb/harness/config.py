"""Experiment configuration: defaults, flat ``key = value`` files and CLI overrides."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..channel import KINDS

PROFILES = ("desk", "paper")
DEFAULT_SNR_GRID = (-3.0, 0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0)
DEFAULT_THETAS = (0.1, 0.2, 0.3, 0.4, 0.5)


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in str(text).replace(";", ",").split(",") if t.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in str(text).replace(";", ",").split(",") if t.strip())


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _opt_int(text: str) -> int | None:
    return None if str(text).strip().lower() in ("", "none", "unlimited") else int(text)


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: str | None = None
    kb: str | None = None
    model: tuple[str, ...] = ()
    vocab: str | None = None
    embeddings: str | None = None
    ldpc: str | None = None
    huffman: str | None = None
    out: str | None = None
    channel: str = "awgn"
    rician_k_db: float = 10.0
    snr_grid: tuple[float, ...] = DEFAULT_SNR_GRID
    theta: float = 0.3
    thetas: tuple[float, ...] = DEFAULT_THETAS
    seeds: tuple[int, ...] = (0,)
    profile: str = "desk"
    split_seed: int = 0
    max_vocab: int = 1000
    max_kb_size: int | None = None
    metric: str = "similarity"
    lam: float = 1.0
    include_index_cost: bool = False
    use_knowledge: bool = True
    methods: tuple[str, ...] = ()
    eval_snr_db: float = 6.0
    epochs: int | None = None
    lr: float | None = None
    batch_size: int | None = None
    dtype: str = "float32"
    integration_residual: str = "value"
    integration_dense: bool = False

    def __post_init__(self):
        if not self.snr_grid:
            raise ConfigError("SNR grid must be non-empty")
        if list(self.snr_grid) != sorted(self.snr_grid):
            raise ConfigError("SNR grid must be sorted")
        if any(math.isnan(s) for s in self.snr_grid):
            raise ConfigError("SNR grid contains NaN")
        for t in (self.theta, *self.thetas):
            if not 0.0 <= t <= 1.0:
                raise ConfigError(f"theta {t} outside [0, 1]")
        if self.channel not in KINDS:
            raise ConfigError(f"unknown channel {self.channel!r}")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.metric not in ("similarity", "bleu"):
            raise ConfigError(f"unknown metric {self.metric!r}")
        if self.dtype not in ("float32", "float64"):
            raise ConfigError(f"unknown dtype {self.dtype!r}")

    def replace(self, **kw) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)


_PARSERS: dict[str, Any] = {
    "model": lambda v: tuple(p.strip() for p in str(v).split(",") if p.strip()),
    "rician_k_db": float,
    "snr_grid": _floats,
    "theta": float,
    "thetas": _floats,
    "seeds": _ints,
    "seed": _ints,
    "split_seed": int,
    "max_vocab": int,
    "max_kb_size": _opt_int,
    "lam": float,
    "include_index_cost": _bool,
    "use_knowledge": _bool,
    "methods": lambda v: tuple(p.strip() for p in str(v).split(",") if p.strip()),
    "eval_snr_db": float,
    "epochs": _opt_int,
    "lr": lambda v: None if str(v).strip().lower() in ("", "none") else float(v),
    "batch_size": _opt_int,
    "integration_dense": _bool,
}
_FIELDS = {f.name for f in dataclasses.fields(ExperimentConfig)}


def coerce(values: dict[str, Any]) -> dict[str, Any]:
    """Parse string values into field types; ``seed`` is an alias of ``seeds``."""
    out = {}
    for key, raw in values.items():
        key = key.strip().replace("-", "_")
        if key not in _FIELDS and key != "seed":
            raise ConfigError(f"unknown config key {key!r}")
        value = _PARSERS.get(key, lambda v: v)(raw) if isinstance(raw, str) else raw
        out["seeds" if key == "seed" else key] = value
    return out


def parse_config_text(text: str) -> dict[str, Any]:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        values[key.strip()] = value.strip()
    return coerce(values)


def load_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Defaults, then the file, then ``overrides`` (entries set to None are ignored)."""
    values = parse_config_text(Path(path).read_text(encoding="utf-8")) if path else {}
    values.update(coerce({k: v for k, v in (overrides or {}).items() if v is not None}))
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
