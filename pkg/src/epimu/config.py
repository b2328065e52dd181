"""Budgets and runtime options."""
import os
from dataclasses import dataclass

DEFAULT_STATE_CAP = 200_000
DEFAULT_NODE_CAP = 1_000_000
DEFAULT_FUEL = 16
DEFAULT_ORACLE_DEPTH = 6


def _env_state_cap():
    raw = os.environ.get("EPIMU_BUDGET_STATES")
    if raw is None:
        return DEFAULT_STATE_CAP
    return int(raw)


@dataclass(frozen=True)
class Config:
    state_cap: int = DEFAULT_STATE_CAP
    node_cap: int = DEFAULT_NODE_CAP
    fuel: int = DEFAULT_FUEL
    oracle_depth: int = DEFAULT_ORACLE_DEPTH
    json: bool = False
    seed: int = 0

    def __post_init__(self):
        for name in ("state_cap", "node_cap", "fuel", "oracle_depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @classmethod
    def from_env(cls, **overrides):
        overrides.setdefault("state_cap", _env_state_cap())
        return cls(**overrides)
