"""Reference optima for bound checks.

Solver guarantees are stated against f* and x*, which the algorithms never
see. This module produces them once per instance with an auxiliary
high-accuracy solve (closed form for quadratics, quasi-Newton plus damped
Newton polishing otherwise) and caches the result on the objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .objectives import FiniteSumObjective, QuadraticObjective

_CACHE_ATTR = "_reference_point"


@dataclass(frozen=True)
class ReferencePoint:
    x_star: np.ndarray
    f_star: float
    grad_norm: float


def _newton_polish(obj, x, grad_tol, max_steps=100):
    g = obj.grad(x)
    for _ in range(max_steps):
        gn = np.linalg.norm(g)
        if gn <= grad_tol:
            break
        H = obj.hessian(x)
        # tiny ridge keeps the solve well-posed on flat directions
        step = np.linalg.solve(H + 1e-12 * np.eye(obj.d), g)
        t = 1.0
        f0 = obj.value(x)
        while t > 1e-8:
            x_new = x - t * step
            if obj.value(x_new) <= f0:
                break
            t *= 0.5
        x = x - t * step
        g = obj.grad(x)
    return x, g


def reference_minimum(obj: FiniteSumObjective, grad_tol: float = 1e-12,
                      x_init: np.ndarray | None = None) -> ReferencePoint:
    """High-accuracy (x*, f*) for ``obj``, cached per instance."""
    cached = getattr(obj, _CACHE_ATTR, None)
    if cached is not None:
        return cached

    if isinstance(obj, QuadraticObjective):
        x_star = np.linalg.lstsq(obj.A, obj.b, rcond=None)[0]
    else:
        x0 = np.zeros(obj.d) if x_init is None else np.asarray(x_init, float)
        res = minimize(obj.value, x0, jac=obj.grad, method="L-BFGS-B",
                       options={"maxiter": 2000, "gtol": 1e-10, "ftol": 0.0})
        x_star, _ = _newton_polish(obj, res.x, grad_tol)

    g = obj.grad(x_star)
    point = ReferencePoint(x_star=x_star, f_star=float(obj.value(x_star)),
                           grad_norm=float(np.linalg.norm(g)))
    setattr(obj, _CACHE_ATTR, point)
    return point


def initial_constants(obj: FiniteSumObjective, x0: np.ndarray) -> tuple[float, float]:
    """(Delta0, R0) = (f(x0) - f*, ||x0 - x*||) from the reference optimum."""
    ref = reference_minimum(obj)
    delta0 = obj.value(np.asarray(x0, float)) - ref.f_star
    r0 = float(np.linalg.norm(np.asarray(x0, float) - ref.x_star))
    return float(delta0), r0
