"""Counted gradient oracle: the single source of truth for oracle complexity.

A component gradient costs 1, a full gradient costs n. Value evaluations and
the metric channel (:meth:`CountingOracle.metric_grad`) never touch the
counter, so convergence curves can be recorded without distorting the
complexity accounting. Each oracle instance is owned by exactly one run.
"""

from __future__ import annotations

import numpy as np

from .objectives import FiniteSumObjective, RegularizedObjective


class CountingOracle:
    def __init__(self, objective: FiniteSumObjective):
        self.objective = objective
        self.count = 0

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def d(self) -> int:
        return self.objective.d

    @property
    def L(self) -> float:
        return self.objective.L

    def grad_component(self, i: int, x: np.ndarray) -> np.ndarray:
        self.count += 1
        return self.objective.grad_component(i, x)

    def grad_component_diff(self, i: int, x: np.ndarray,
                            y: np.ndarray) -> np.ndarray:
        """grad f_i(x) - grad f_i(y): two component evaluations, cost 2."""
        self.count += 2
        return self.objective.grad_component_diff(i, x, y)

    def grad_full(self, x: np.ndarray) -> np.ndarray:
        self.count += self.objective.n
        return self.objective.grad(x)

    # -- uncounted channels ------------------------------------------------

    def value(self, x: np.ndarray) -> float:
        return self.objective.value(x)

    def metric_grad(self, x: np.ndarray) -> np.ndarray:
        """Exact full gradient for metrics/tests; never counted."""
        return self.objective.grad(x)

    def regularized(self, x0: np.ndarray, delta: float) -> "RegularizedOracleView":
        """A view of this oracle on f_i(x) + (delta/2)||x - x0||^2.

        Calls through the view hit the same counter, so the total cost of a
        run that re-regularizes repeatedly accumulates in one place.
        """
        return RegularizedOracleView(self, x0, delta)


class RegularizedOracleView:
    def __init__(self, oracle: CountingOracle, x0: np.ndarray, delta: float):
        self._oracle = oracle
        self.objective = RegularizedObjective(oracle.objective, x0, delta)
        self.x0 = self.objective.x0
        self.delta = self.objective.delta

    @property
    def n(self) -> int:
        return self.objective.n

    @property
    def d(self) -> int:
        return self.objective.d

    @property
    def L(self) -> float:
        return self.objective.L

    @property
    def count(self) -> int:
        return self._oracle.count

    def grad_component(self, i: int, x: np.ndarray) -> np.ndarray:
        g = self._oracle.grad_component(i, x)
        return g + self.delta * (x - self.x0)

    def grad_component_diff(self, i: int, x: np.ndarray,
                            y: np.ndarray) -> np.ndarray:
        g = self._oracle.grad_component_diff(i, x, y)
        return g + self.delta * (x - y)

    def grad_full(self, x: np.ndarray) -> np.ndarray:
        g = self._oracle.grad_full(x)
        return g + self.delta * (x - self.x0)

    def value(self, x: np.ndarray) -> float:
        return self.objective.value(x)

    def base_grad(self, reg_grad: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Recover the unregularized gradient; same path as the objective."""
        return self.objective.base_grad_from(reg_grad, x)
