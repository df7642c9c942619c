"""Loopless variance-reduced methods.

The accelerated scheme keeps a snapshot x~ with its cached full gradient and
flips the snapshot to the current extrapolation point with a per-iteration
coin, so every iteration costs 2 component gradients plus n on a flip. SVRG,
SAGA and a loopless SARAH variant (L2S) are included as baselines with their
standard step sizes 1/(4L), 1/(3L) and eta = c/L or 1/(L sqrt(n)).

Every run owns a seeded generator. Within an iteration the component index
is drawn first and the snapshot/restart coin second (L2S draws its restart
coin first since it decides whether an index is needed at all); auxiliary
output sampling uses a separate child stream so the trajectory for a given
seed does not depend on the output rule.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .objectives import _as_vector
from .traces import StochTrace


class ScheduleKind(enum.Enum):
    SINGLE_STAGE = "single-stage"
    TWO_STAGE = "two-stage"
    LOW_ACCURACY = "low-accuracy"


def schedule(k: int, n: int, kind: ScheduleKind) -> tuple[float, float]:
    """(tau_k, p_k) for the accelerated scheme; pure in (k, n)."""
    if k < 0 or n < 1:
        raise ValueError("need k >= 0 and n >= 1")
    if kind is ScheduleKind.SINGLE_STAGE:
        return 3.0 / (k / n + 6.0), 1.0 / n
    if kind is ScheduleKind.TWO_STAGE:
        p = max(6.0 / (k + 8.0), 1.0 / n)
        return 3.0 / (p * (k + 8.0)), p
    if kind is ScheduleKind.LOW_ACCURACY:
        return 1.0 - 1.0 / math.sqrt(n + 1.0), 1.0 / n
    raise ValueError(f"unknown schedule kind {kind!r}")


OUTPUT_RULES = ("grad_sample", "last_snapshot", "min_tracked")


def _output_weights(K: int, n: int, kind, schedule_fn) -> np.ndarray:
    """Unnormalized sampling weights tau_k^{-2} for k = 0..K-1."""
    if schedule_fn is None:
        ks = np.arange(K, dtype=float)
        if kind is ScheduleKind.SINGLE_STAGE:
            taus = 3.0 / (ks / n + 6.0)
        elif kind is ScheduleKind.TWO_STAGE:
            ps = np.maximum(6.0 / (ks + 8.0), 1.0 / n)
            taus = 3.0 / (ps * (ks + 8.0))
        else:
            taus = np.full(K, 1.0 - 1.0 / math.sqrt(n + 1.0))
    else:
        taus = np.array([schedule_fn(k, n)[0] for k in range(K)])
    return taus ** -2.0


@dataclass
class AccSvrgResult:
    output: np.ndarray
    trace: StochTrace
    stop_iteration: int


def _spawn_streams(seed):
    traj_ss, out_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(traj_ss), np.random.default_rng(out_ss)


def run_acc_svrg_g(oracle, x0, K: int, kind: ScheduleKind = ScheduleKind.TWO_STAGE,
                   seed: int = 0, output: str = "grad_sample",
                   f_star: float | None = None, schedule_fn=None,
                   max_oracle_calls: int | None = None) -> AccSvrgResult:
    """Accelerated loopless SVRG with gradient-norm guarantees.

    Per iteration:
      y_k     = tau_k z_k + (1 - tau_k)(x~_k - (1/L) grad f(x~_k)),
      z_{k+1} = z_k - G_k / alpha_k   with alpha_k = L tau_k / (1 - tau_k),
      G_k     = grad f_{i_k}(y_k) - grad f_{i_k}(x~_k) + grad f(x~_k),
      x~_{k+1} = y_k with probability p_k, else x~_k.

    Output rules: ``grad_sample`` returns x~_j with j presampled before the
    run from Prob{j = k} proportional to tau_k^{-2} (only the one candidate
    snapshot is retained); ``last_snapshot`` returns x~_K; ``min_tracked``
    returns the snapshot whose recorded full gradient was smallest.

    ``schedule_fn(k, n) -> (tau, p)`` overrides ``kind``; it is how tests
    force p == 1 to recover the deterministic two-line recursion at n = 1.
    ``max_oracle_calls`` stops the run once the counted budget is consumed
    (incompatible with ``grad_sample``, whose weights need the realized K).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    if output not in OUTPUT_RULES:
        raise ValueError(f"output must be one of {OUTPUT_RULES}")
    if output == "grad_sample" and max_oracle_calls is not None:
        raise ValueError("grad_sample requires a fixed iteration count")
    x0 = _as_vector(x0, oracle.d)
    n, L = oracle.n, oracle.L
    sched = schedule_fn if schedule_fn is not None else (
        lambda k, nn: schedule(k, nn, kind))

    traj_rng, out_rng = _spawn_streams(seed)
    out_index = -1
    candidate = None
    if output == "grad_sample":
        w = _output_weights(K, n, kind, schedule_fn)
        out_index = int(out_rng.choice(K, p=w / w.sum()))

    trace = StochTrace(method="acc-svrg-g", seed=seed, n=n, step_cost=2,
                       f_star=f_star)
    start = oracle.count
    budget = max_oracle_calls

    x_t = x0.copy()
    z = x0.copy()
    trace.record(0, oracle.count, True, np.nan, np.nan)
    g_t = oracle.grad_full(x_t)
    trace.num_snapshots += 1
    gnorm = float(np.linalg.norm(g_t))
    trace.grad_norms[-1] = gnorm
    trace.f_values[-1] = oracle.value(x_t)
    best_norm, best_x = gnorm, x_t.copy()

    iters = 0
    while iters < K:
        if budget is not None and oracle.count - start >= budget:
            break
        k = iters
        if k == out_index:
            candidate = x_t.copy()
        tau, p = sched(k, n)
        if not 0.0 < tau < 1.0:
            raise ValueError(f"schedule produced tau={tau} outside (0, 1)")
        alpha = L * tau / (1.0 - tau)
        y = tau * z + (1.0 - tau) * (x_t - g_t / L)
        i = int(traj_rng.integers(n))
        G = oracle.grad_component_diff(i, y, x_t) + g_t
        z = z - G / alpha
        trace.num_steps += 1
        iters += 1
        if traj_rng.random() < p:
            x_t = y
            trace.record(k + 1, oracle.count, True, np.nan, np.nan)
            g_t = oracle.grad_full(x_t)
            trace.num_snapshots += 1
            gnorm = float(np.linalg.norm(g_t))
            trace.grad_norms[-1] = gnorm
            trace.f_values[-1] = oracle.value(x_t)
            if gnorm < best_norm:
                best_norm, best_x = gnorm, x_t.copy()
    trace.record(iters, oracle.count, False, gnorm, oracle.value(x_t))
    trace.final_count = oracle.count - start

    if output == "grad_sample":
        out = candidate if candidate is not None else x_t.copy()
    elif output == "last_snapshot":
        out = x_t
    else:
        out = best_x
    return AccSvrgResult(output=out, trace=trace, stop_iteration=iters)


def run_acc_svrg_g_low_accuracy(oracle, x0, seed: int = 0,
                                f_star: float | None = None,
                                max_iter: int = 10 ** 8) -> AccSvrgResult:
    """Constant-parameter variant stopped at the first snapshot flip.

    Uses tau = 1 - 1/sqrt(n+1) and p = 1/n, runs until the coin first flips
    at some iteration N (geometric with parameter p), and outputs
    x~_{N+1} = y_N. Expected counted cost is n + 2/p = 3n + O(1); the final
    gradient norm in the trace comes from the uncounted metric channel.
    """
    x0 = _as_vector(x0, oracle.d)
    n, L = oracle.n, oracle.L
    tau, p = schedule(0, n, ScheduleKind.LOW_ACCURACY)
    alpha = L * tau / (1.0 - tau)
    traj_rng, _ = _spawn_streams(seed)

    trace = StochTrace(method="acc-svrg-g-low", seed=seed, n=n, step_cost=2,
                       f_star=f_star)
    start = oracle.count
    trace.record(0, oracle.count, True, np.nan, np.nan)
    g0 = oracle.grad_full(x0)
    trace.num_snapshots += 1
    trace.grad_norms[-1] = float(np.linalg.norm(g0))
    trace.f_values[-1] = oracle.value(x0)

    z = x0.copy()
    anchor = (1.0 - tau) * (x0 - g0 / L)  # snapshot term is constant pre-flip
    for k in range(max_iter):
        y = tau * z + anchor
        i = int(traj_rng.integers(n))
        G = oracle.grad_component_diff(i, y, x0) + g0
        z = z - G / alpha
        trace.num_steps += 1
        if traj_rng.random() < p:
            gn = float(np.linalg.norm(oracle.metric_grad(y)))
            trace.record(k + 1, oracle.count, False, gn, oracle.value(y))
            trace.final_count = oracle.count - start
            return AccSvrgResult(output=y, trace=trace, stop_iteration=k)
    raise RuntimeError("no snapshot flip within max_iter iterations")


@dataclass
class BaselineResult:
    output: np.ndarray
    trace: StochTrace


def _budget(oracle, passes, max_oracle_calls):
    return int(round(passes * oracle.n)) if max_oracle_calls is None \
        else int(max_oracle_calls)


def run_svrg(oracle, x0, passes: float, seed: int = 0,
             step: float | None = None, f_star: float | None = None,
             max_oracle_calls: int | None = None) -> BaselineResult:
    """Loopless SVRG with step 1/(4L) and restart probability 1/n.

    x_{k+1} = x_k - eta (grad f_i(x_k) - grad f_i(w) + grad f(w)); the
    snapshot w jumps to x_k with probability 1/n, refreshing its cached
    full gradient.
    """
    x = _as_vector(x0, oracle.d).copy()
    n, L = oracle.n, oracle.L
    eta = 1.0 / (4.0 * L) if step is None else float(step)
    p = 1.0 / n
    rng = np.random.default_rng(seed)
    trace = StochTrace(method="svrg", seed=seed, n=n, step_cost=2,
                       f_star=f_star)
    start = oracle.count
    budget = _budget(oracle, passes, max_oracle_calls)

    w = x.copy()
    trace.record(0, oracle.count, True, np.nan, np.nan)
    g_w = oracle.grad_full(w)
    trace.num_snapshots += 1
    trace.grad_norms[-1] = float(np.linalg.norm(g_w))
    trace.f_values[-1] = oracle.value(w)

    k = 0
    while oracle.count - start < budget:
        i = int(rng.integers(n))
        g = oracle.grad_component_diff(i, x, w) + g_w
        x_new = x - eta * g
        trace.num_steps += 1
        if rng.random() < p:
            w = x.copy()
            trace.record(k + 1, oracle.count, True, np.nan, np.nan)
            g_w = oracle.grad_full(w)
            trace.num_snapshots += 1
            trace.grad_norms[-1] = float(np.linalg.norm(g_w))
            trace.f_values[-1] = oracle.value(w)
        x = x_new
        k += 1
    gn = float(np.linalg.norm(oracle.metric_grad(x)))
    trace.record(k, oracle.count, False, gn, oracle.value(x))
    trace.final_count = oracle.count - start
    return BaselineResult(output=x, trace=trace)


def run_saga(oracle, x0, passes: float, seed: int = 0,
             step: float | None = None, f_star: float | None = None,
             max_oracle_calls: int | None = None,
             table_cap_bytes: int = 1 << 30,
             metric_every_passes: float | None = 1.0) -> BaselineResult:
    """SAGA with step 1/(3L) and an n-by-d stored gradient table.

    The table is filled at x0 (n counted calls); each step refreshes one row.
    SAGA computes no full gradients of its own, so convergence metrics come
    from the uncounted metric channel at a per-pass cadence.
    """
    x = _as_vector(x0, oracle.d).copy()
    n, d, L = oracle.n, oracle.d, oracle.L
    table_bytes = n * d * 8
    if table_bytes > table_cap_bytes:
        raise ValueError(
            f"SAGA table needs {table_bytes} bytes > cap {table_cap_bytes}")
    eta = 1.0 / (3.0 * L) if step is None else float(step)
    rng = np.random.default_rng(seed)
    trace = StochTrace(method="saga", seed=seed, n=n, step_cost=1,
                       f_star=f_star)
    start = oracle.count
    budget = _budget(oracle, passes, max_oracle_calls)

    trace.record(0, oracle.count, True, np.nan, np.nan)
    table = np.empty((n, d))
    for i in range(n):
        table[i] = oracle.grad_component(i, x)
    trace.num_snapshots += 1
    mean = table.mean(axis=0)
    trace.grad_norms[-1] = float(np.linalg.norm(mean))
    trace.f_values[-1] = oracle.value(x)

    metric_stride = None if metric_every_passes is None \
        else max(int(metric_every_passes * n), 1)
    next_metric = metric_stride
    k = 0
    while oracle.count - start < budget:
        i = int(rng.integers(n))
        g_new = oracle.grad_component(i, x)
        x = x - eta * (g_new - table[i] + mean)
        mean = mean + (g_new - table[i]) / n
        table[i] = g_new
        trace.num_steps += 1
        k += 1
        if next_metric is not None and oracle.count - start >= next_metric:
            gn = float(np.linalg.norm(oracle.metric_grad(x)))
            trace.record(k, oracle.count, False, gn, oracle.value(x))
            next_metric += metric_stride
    gn = float(np.linalg.norm(oracle.metric_grad(x)))
    trace.record(k, oracle.count, False, gn, oracle.value(x))
    trace.final_count = oracle.count - start
    trace.extra["table"] = table
    trace.extra["table_mean"] = mean
    return BaselineResult(output=x, trace=trace)


def l2s_step_size(L: float, n: int, kind: str = "n-independent",
                  c: float = 0.25) -> float:
    """eta = c/L (n-independent) or 1/(L sqrt(n)) (n-dependent)."""
    if kind == "n-independent":
        return c / L
    if kind == "n-dependent":
        return 1.0 / (L * math.sqrt(n))
    raise ValueError("kind must be 'n-independent' or 'n-dependent'")


def run_l2s(oracle, x0, T: int, eta: float, seed: int = 0,
            m: int | None = None, f_star: float | None = None,
            max_oracle_calls: int | None = None) -> BaselineResult:
    """Loopless SARAH: biased recursive estimator with random restarts.

    v_k = grad f_{i_k}(x_k) - grad f_{i_k}(x_{k-1}) + v_{k-1} and
    x_{k+1} = x_k - eta v_k; with probability 1/m the recursion restarts
    from a full gradient (v_0 is always a full gradient). The restart coin
    is drawn before the component index since it decides whether an index
    is needed. Output is uniform over the iterates x_0..x_{T-1}, presampled
    on a separate stream.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if eta <= 0:
        raise ValueError("eta must be positive")
    x = _as_vector(x0, oracle.d).copy()
    n = oracle.n
    m = n if m is None else int(m)
    traj_rng, out_rng = _spawn_streams(seed)
    out_index = int(out_rng.integers(T))
    trace = StochTrace(method="l2s", seed=seed, n=n, step_cost=2,
                       f_star=f_star)
    start = oracle.count
    budget = max_oracle_calls

    candidate = x.copy() if out_index == 0 else None
    trace.record(0, oracle.count, True, np.nan, np.nan)
    v = oracle.grad_full(x)
    trace.num_snapshots += 1
    trace.grad_norms[-1] = float(np.linalg.norm(v))
    trace.f_values[-1] = oracle.value(x)
    x_prev = x
    x = x - eta * v
    restarts = 0

    iters = 1
    while iters < T:
        if budget is not None and oracle.count - start >= budget:
            break
        k = iters
        if k == out_index:
            candidate = x.copy()
        if traj_rng.random() < 1.0 / m:
            trace.record(k, oracle.count, True, np.nan, np.nan)
            v = oracle.grad_full(x)
            trace.num_snapshots += 1
            restarts += 1
            trace.grad_norms[-1] = float(np.linalg.norm(v))
            trace.f_values[-1] = oracle.value(x)
        else:
            i = int(traj_rng.integers(n))
            v = oracle.grad_component_diff(i, x, x_prev) + v
            trace.num_steps += 1
        x_prev = x
        x = x - eta * v
        iters += 1
    gn = float(np.linalg.norm(oracle.metric_grad(x)))
    trace.record(iters, oracle.count, False, gn, oracle.value(x))
    trace.final_count = oracle.count - start
    trace.extra["restarts"] = restarts
    out = candidate if candidate is not None else x.copy()
    return BaselineResult(output=out, trace=trace)
