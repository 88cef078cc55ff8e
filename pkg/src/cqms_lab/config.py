"""Experiment configuration: one JSON document, overridable from the command line."""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError

COMMANDS = ("growth", "leibniz", "seminorm", "mdim", "entropy", "hyperbolic-cert", "lipschitz")


@dataclass
class ExperimentConfig:
    """Shared settings plus one section per command.

    Each command section is a free-form dict read by that command; the
    typed fields here are the ones every command shares.
    """

    seed: int
    sections: dict = field(default_factory=dict)
    cardinality_cap: int = 10_000_000
    iteration_cap: int = 10_000
    power_tol: float = 1e-8
    cache_dir: str | None = None
    out_dir: str = "cqms-reports"
    emit: str = "json"
    source: str | None = None

    def __post_init__(self):
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.cardinality_cap <= 0 or self.iteration_cap <= 0:
            raise ConfigError("caps must be positive")
        if not self.power_tol > 0:
            raise ConfigError("power_tol must be positive")
        if self.emit not in ("json", "csv"):
            raise ConfigError("emit must be 'json' or 'csv'")
        unknown = set(self.sections) - set(COMMANDS)
        if unknown:
            raise ConfigError(f"unknown command sections: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, obj: dict, source: str | None = None) -> "ExperimentConfig":
        obj = copy.deepcopy(obj)
        if "seed" not in obj:
            raise ConfigError("config must set 'seed'")
        caps = obj.pop("caps", {})
        sections = {name: obj.pop(name) for name in COMMANDS if name in obj}
        known = {"seed", "cache_dir", "out_dir", "emit", "power_tol"}
        extra = set(obj) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(
            seed=obj["seed"],
            sections=sections,
            cardinality_cap=caps.get("cardinality", 10_000_000),
            iteration_cap=caps.get("iterations", 10_000),
            power_tol=obj.get("power_tol", 1e-8),
            cache_dir=obj.get("cache_dir"),
            out_dir=obj.get("out_dir", "cqms-reports"),
            emit=obj.get("emit", "json"),
            source=source,
        )

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(obj, source=str(path))

    def section(self, command: str) -> dict:
        return self.sections.get(command, {})

    def echo(self) -> dict:
        """The effective configuration, as recorded in reports (paths excluded)."""
        return {
            "seed": self.seed,
            "caps": {"cardinality": self.cardinality_cap, "iterations": self.iteration_cap},
            "power_tol": self.power_tol,
            "sections": self.sections,
        }

    def rng(self, *names: str) -> np.random.Generator:
        """Independent generator for a named stream, e.g. ``rng("seminorm", "dft")``."""
        return np.random.default_rng(np.random.SeedSequence([self.seed, *(stream_key(n) for n in names)]))


def stream_key(name: str) -> int:
    """Stable 64-bit key for a stream name (Python's hash() is salted per process)."""
    return int.from_bytes(hashlib.sha256(name.encode()).digest()[:8], "little")
