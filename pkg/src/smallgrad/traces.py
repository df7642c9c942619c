"""Per-run trace records shared by all solvers.

Events carry the oracle count at the moment the recorded point was reached,
so curves plot on the oracle-pass axis (1 pass = n component gradients).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class DetTrace:
    """Trace of a full-gradient method: one event per iterate x_0..x_N."""

    method: str
    n: int
    ks: np.ndarray
    oracle_counts: np.ndarray
    grad_norms: np.ndarray
    f_values: np.ndarray
    final_x: np.ndarray
    output_x: np.ndarray
    f_star: float | None = None
    schedule_len: int = 0  # length of any stored per-iteration parameter array
    internal: dict = field(default_factory=dict)  # opt-in iterate histories

    @property
    def passes(self) -> np.ndarray:
        return self.oracle_counts / self.n

    @property
    def f_gaps(self) -> np.ndarray:
        if self.f_star is None:
            return np.full_like(self.f_values, np.nan)
        return self.f_values - self.f_star

    @property
    def min_tracked(self) -> np.ndarray:
        return np.minimum.accumulate(self.grad_norms)


@dataclass
class StochTrace:
    """Trace of a randomized method.

    Events are recorded wherever a full gradient becomes available (snapshot
    refreshes, restarts, the initial point, the final state) plus optional
    uncounted metric probes. ``num_steps``/``num_snapshots`` hold the exact
    accounting: count = n * num_snapshots + step_cost * num_steps.
    """

    method: str
    seed: int
    n: int
    step_cost: int = 2
    f_star: float | None = None
    ks: list = field(default_factory=list)
    oracle_counts: list = field(default_factory=list)
    snapshot_flags: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    f_values: list = field(default_factory=list)
    num_steps: int = 0
    num_snapshots: int = 0
    final_count: int = 0
    extra: dict = field(default_factory=dict)

    def record(self, k: int, count: int, snapshot: bool, grad_norm: float,
               f_value: float) -> None:
        self.ks.append(k)
        self.oracle_counts.append(count)
        self.snapshot_flags.append(snapshot)
        self.grad_norms.append(grad_norm)
        self.f_values.append(f_value)

    @property
    def passes(self) -> np.ndarray:
        return np.asarray(self.oracle_counts, dtype=float) / self.n

    @property
    def f_gaps(self) -> np.ndarray:
        vals = np.asarray(self.f_values, dtype=float)
        if self.f_star is None:
            return np.full_like(vals, np.nan)
        return vals - self.f_star

    @property
    def min_tracked(self) -> np.ndarray:
        return np.minimum.accumulate(np.asarray(self.grad_norms, dtype=float))
