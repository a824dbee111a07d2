"""Solver configuration."""

from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

SIZE_CAP_ENV = "ISOFW_SIZE_CAP"


def _default_size_cap() -> int:
    raw = os.environ.get(SIZE_CAP_ENV)
    return int(raw) if raw else 128


@dataclass(frozen=True)
class SolverConfig:
    tol_group: float = 1e-8
    tol_friendly: float = 1e-8
    tol_entry: float = 1e-8
    tol_bin: float = 1e-6
    tol_eq: float = 1e-8
    tol_pos: float = 1e-8
    tol_progress: float = 1e-10
    max_iters: int = 200
    max_restarts: int = 20
    stall_window: int = 3
    stall_rel: float = 0.02
    seed: int = 0
    perturb_range: tuple[float, float] = (0.1, 0.5)
    size_cap: int = None  # type: ignore[assignment]
    max_lp_entries: int = 60_000_000
    trace_path: Path | None = None
    snapshots: bool = False

    def __post_init__(self):
        if self.size_cap is None:
            object.__setattr__(self, "size_cap", _default_size_cap())
        for f in fields(self):
            if f.name.startswith("tol_") and not getattr(self, f.name) > 0:
                raise ValueError(f"{f.name} must be positive")
        if self.max_iters < 1 or self.size_cap < 1 or self.max_lp_entries < 1:
            raise ValueError("max_iters, size_cap and max_lp_entries must be >= 1")
        if self.stall_window < 1 or self.stall_rel < 0:
            raise ValueError("stall_window must be >= 1 and stall_rel >= 0")
        if self.max_restarts < 0:
            raise ValueError("max_restarts must be >= 0")
        lo, hi = self.perturb_range
        if not 0 < lo <= hi <= 1:
            raise ValueError("perturb_range must satisfy 0 < lo <= hi <= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)
