"""Runtime configuration: caps, thresholds, tolerances, report constants.

Every constant that the mathematics leaves abstract lives here so that it
can be echoed into artifacts for provenance.  ``bpb_C``, ``najp_Cprime``
and ``najp_Cdoubleprime`` are reporting stand-ins only; no algorithmic
branch depends on them.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError

ENV_VAR = "FINABEL_CONFIG"


@dataclass(frozen=True)
class Config:
    # hard caps
    max_order: int = 4096          # largest constructible group order
    enumeration_cap: int = 64      # largest order for subgroup enumeration
    lp_cap: int = 4_000_000        # largest simplex tableau (cells)
    decompose_node_cap: int = 100_000

    # thresholds
    rounding_threshold: float = 0.02   # certificate admission on d(f, Z)
    corkey_threshold: float = 0.1      # chain-construction admission
    round_margin: float = 1e-6         # guard band below 1/2 for rounding

    # report-only constants
    bpb_C: float = 32.0
    najp_Cprime: float = 2.0
    najp_Cdoubleprime: float = 328.0   # 4*C + 324*C' recipe with C=32, C'=2

    # tolerances
    tol_exact: float = 1e-10   # identities expected to machine precision
    tol_sum: float = 1e-9      # accumulated sums (Parseval and friends)
    tol_constraint: float = 1e-8   # LP/certificate constraint slack

    seed: int = 0

    def __post_init__(self):
        for name in ("max_order", "enumeration_cap", "lp_cap",
                     "decompose_node_cap"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("tol_exact", "tol_sum", "tol_constraint"):
            value = getattr(self, name)
            if not (0.0 < value < 1e-2):
                raise ConfigError(f"{name} must lie in (0, 1e-2)")
        if not (0.0 < self.rounding_threshold < 0.5):
            raise ConfigError("rounding_threshold must lie in (0, 1/2)")
        if not (0.0 < self.corkey_threshold < 0.5):
            raise ConfigError("corkey_threshold must lie in (0, 1/2)")
        if not (0.0 < self.round_margin < 0.5):
            raise ConfigError("round_margin must lie in (0, 1/2)")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


DEFAULT_CONFIG = Config()


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Load configuration from ``path``, the environment, or defaults."""
    if path is None:
        path = os.environ.get(ENV_VAR)
    if path is None:
        return DEFAULT_CONFIG
    with open(path, "r", encoding="utf-8") as handle:
        return Config.from_dict(json.load(handle))


def dump_config(config: Config, path: str | os.PathLike) -> None:
    Path(path).write_text(
        json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
