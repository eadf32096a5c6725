"""Experiment configuration: flat key-value files with CLI-flag overrides.

Precedence is defaults < config file < command-line flags.  Reports embed a
hash of the resolved configuration and carry no timestamps, so identical
configurations produce byte-identical JSON.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace


class ConfigError(ValueError):
    """The configuration file or flags failed schema validation."""


_KNOWN_FAMILIES = ("fejer", "fib-fejer", "identity", "partial-sum")
_KNOWN_WEIGHTS = ("n^-1/4", "n^-1/2", "1/log", "const", "n^-1")


@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    n: int = 100_000            # sequence horizon (--N)
    k: int = 256                # operator index horizon (--K)
    m: int = 1024               # grid size (--M)
    eps: tuple = (0.5, 0.25)    # epsilon grid, sorted descending (--eps, repeatable)
    zero_threshold: float = 0.005
    out: str = "out"
    witness: str = ""           # witness / oracle-set name where a command needs one
    family: str = "fejer"
    target: tuple = ("sin2", "abs-sin")
    weights: str = "n^-1/4"
    plots: bool = True
    seed: int = 20260810
    fib_n: int = 300            # identity-audit horizon
    transform_n: int = 2000     # horizon for transform-composed statistical audits
    classical_tol: float = 0.02
    rate_threshold: float = 0.05
    rate_n: int = 2**20

    def validate(self) -> "ExperimentConfig":
        eps = tuple(sorted((float(e) for e in self.eps), reverse=True))
        if not eps or eps[-1] <= 0:
            raise ConfigError("eps must be a nonempty list of positive values")
        # individual commands enforce their own stricter floors at runtime
        for attr, minimum in (("n", 2), ("k", 100), ("fib_n", 4),
                              ("transform_n", 1000), ("rate_n", 10_000)):
            v = getattr(self, attr)
            if not isinstance(v, int) or v < minimum:
                raise ConfigError(f"{attr} must be an integer >= {minimum}, got {v!r}")
        if self.m < 64 or self.m & (self.m - 1):
            raise ConfigError(f"m must be a power of two >= 64, got {self.m}")
        if self.zero_threshold <= 0:
            raise ConfigError("zero_threshold must be positive")
        if self.family not in _KNOWN_FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}; known: {_KNOWN_FAMILIES}")
        if self.weights not in _KNOWN_WEIGHTS:
            raise ConfigError(f"unknown weights {self.weights!r}; known: {_KNOWN_WEIGHTS}")
        return replace(self, eps=eps)

    def as_dict(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    def hash(self) -> str:
        payload = json.dumps(self.as_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in ("eps",):
        return tuple(float(p) for p in raw.split(",") if p.strip())
    if key in ("target",):
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    if key in ("plots",):
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"{key} must be a boolean, got {raw!r}")
    if key in ("n", "k", "m", "seed", "fib_n", "transform_n", "rate_n"):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
    if key in ("zero_threshold", "classical_tol", "rate_threshold"):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key} must be a number, got {raw!r}") from None
    return raw


def load_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` file; unknown keys fail loudly."""
    overrides = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, raw = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            overrides[key] = _parse_value(key, raw)
    return overrides


def resolve_config(file_path: str | None = None, flag_overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then config file, then flags; validated."""
    values = {}
    if file_path:
        values.update(load_config_file(file_path))
    if flag_overrides:
        for key, val in flag_overrides.items():
            if val is None:
                continue
            if key not in _FIELD_TYPES:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = val
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None
    return cfg.validate()
