"""Full-gradient methods: GD, NAG, OGM-G (two equivalent forms), M-OGM-G,
a two-phase chain combinator, and a per-iteration replay of the OGM-G
potential inequality.

All runners share the signature ``run(oracle, x0, N, f_star=None)`` and
return a :class:`~smallgrad.traces.DetTrace` with one event per iterate
x_0..x_N. The gradient driving each update is counted (n per iteration);
the gradient norm reported at the final iterate, and at iterates the method
itself never differentiates, comes from the oracle's uncounted metric
channel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .objectives import _as_vector
from .traces import DetTrace


@dataclass(frozen=True)
class ThetaSchedule:
    """Backward recurrence theta_N = 1, theta_k^2 - theta_k = theta_{k+1}^2."""

    N: int
    theta: np.ndarray  # length N+1, theta[k] for k = 0..N

    def validate(self) -> None:
        th = self.theta
        if th[-1] != 1.0:
            raise AssertionError("theta_N must be 1")
        for k in range(self.N):
            resid = th[k] ** 2 - th[k] - th[k + 1] ** 2
            if abs(resid) > 1e-12 * th[k] ** 2:
                raise AssertionError(f"recurrence violated at k={k}")
            if th[k] <= th[k + 1]:
                raise AssertionError("theta must be strictly decreasing")
        if self.N >= 1 and th[0] < (self.N + 2) / 2:
            raise AssertionError("theta_0 >= (N+2)/2 violated")


def theta_schedule(N: int) -> ThetaSchedule:
    """Compute theta_0..theta_N backward from theta_N = 1.

    N = 0 yields the degenerate schedule [1] (a run performs no iterations).
    """
    if N < 0:
        raise ValueError("N must be >= 0")
    theta = np.empty(N + 1)
    theta[N] = 1.0
    for k in range(N - 1, -1, -1):
        theta[k] = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta[k + 1] ** 2))
    return ThetaSchedule(N=N, theta=theta)


def _start_trace(oracle, x0):
    x0 = _as_vector(x0, oracle.d)
    return x0.copy()


def _finish(method, oracle, ks, counts, gnorms, fvals, x, f_star,
            output_x=None, schedule_len=0):
    return DetTrace(
        method=method, n=oracle.n,
        ks=np.asarray(ks), oracle_counts=np.asarray(counts),
        grad_norms=np.asarray(gnorms), f_values=np.asarray(fvals),
        final_x=x, output_x=x if output_x is None else output_x,
        f_star=f_star, schedule_len=schedule_len)


def run_gd(oracle, x0, N: int, f_star: float | None = None) -> DetTrace:
    """Gradient descent x_{k+1} = x_k - (1/L) grad f(x_k)."""
    x = _start_trace(oracle, x0)
    L = oracle.L
    ks, counts, gnorms, fvals = [], [], [], []
    for k in range(N):
        ks.append(k)
        counts.append(oracle.count)
        g = oracle.grad_full(x)
        gnorms.append(np.linalg.norm(g))
        fvals.append(oracle.value(x))
        x = x - g / L
    ks.append(N)
    counts.append(oracle.count)
    gnorms.append(np.linalg.norm(oracle.metric_grad(x)))
    fvals.append(oracle.value(x))
    return _finish("gd", oracle, ks, counts, gnorms, fvals, x, f_star)


def run_nag(oracle, x0, N: int, f_star: float | None = None) -> DetTrace:
    """Convex Nesterov acceleration.

    x_{k+1} = y_k - (1/L) grad f(y_k),
    y_{k+1} = x_{k+1} + ((t_k - 1)/t_{k+1}) (x_{k+1} - x_k),
    with t_0 = 1 and t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2. Guarantees
    f(x_N) - f* <= 2 L ||x_0 - x*||^2 / (N+1)^2.
    """
    x = _start_trace(oracle, x0)
    y = x.copy()
    L = oracle.L
    t = 1.0
    ks, counts, gnorms, fvals = [], [], [], []
    for k in range(N):
        ks.append(k)
        counts.append(oracle.count)
        gnorms.append(np.linalg.norm(oracle.metric_grad(x)))
        fvals.append(oracle.value(x))
        g = oracle.grad_full(y)
        x_next = y - g / L
        t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        y = x_next + ((t - 1.0) / t_next) * (x_next - x)
        x, t = x_next, t_next
    ks.append(N)
    counts.append(oracle.count)
    gnorms.append(np.linalg.norm(oracle.metric_grad(x)))
    fvals.append(oracle.value(x))
    return _finish("nag", oracle, ks, counts, gnorms, fvals, x, f_star)


def run_ogm_g(oracle, x0, N: int, f_star: float | None = None,
              record_iterates: bool = False) -> DetTrace:
    """Momentum form of OGM-G.

    v_{k+1} = v_k + 1/(L theta_k theta_{k+1}^2) grad f(x_k),
    x_{k+1} = x_k - (1/L) grad f(x_k) - (2 theta_{k+1}^3 - theta_{k+1}^2) v_{k+1},
    with v_0 = 0 and the backward theta schedule. The schedule is an O(N)
    stored parameter array, which is the price this form pays over M-OGM-G.
    ``record_iterates`` additionally stores the x_k and v_k histories in
    ``trace.internal`` for equivalence audits.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x = _start_trace(oracle, x0)
    sched = theta_schedule(N)
    th = sched.theta
    L = oracle.L
    v = np.zeros_like(x)
    xs, vs = [x.copy()], [v.copy()]
    ks, counts, gnorms, fvals = [], [], [], []
    for k in range(N):
        ks.append(k)
        counts.append(oracle.count)
        g = oracle.grad_full(x)
        gnorms.append(np.linalg.norm(g))
        fvals.append(oracle.value(x))
        v = v + g / (L * th[k] * th[k + 1] ** 2)
        x = x - g / L - (2.0 * th[k + 1] ** 3 - th[k + 1] ** 2) * v
        if record_iterates:
            xs.append(x.copy())
            vs.append(v.copy())
    ks.append(N)
    counts.append(oracle.count)
    gnorms.append(np.linalg.norm(oracle.metric_grad(x)))
    fvals.append(oracle.value(x))
    trace = _finish("ogm-g", oracle, ks, counts, gnorms, fvals, x, f_star,
                    schedule_len=len(th))
    if record_iterates:
        trace.internal["x"] = np.asarray(xs)
        trace.internal["v"] = np.asarray(vs)
        trace.internal["theta"] = th
    return trace


def run_ogm_g_original(oracle, x0, N: int, f_star: float | None = None,
                       record_iterates: bool = False) -> DetTrace:
    """Two-sequence form of OGM-G, equivalent to :func:`run_ogm_g`.

    y_{k+1} = x_k - (1/L) grad f(x_k),
    x_{k+1} = y_{k+1}
              + ((theta_k - 1)(2 theta_{k+1} - 1)) / (theta_k (2 theta_k - 1))
                * (y_{k+1} - y_k)
              + (2 theta_{k+1} - 1) / (2 theta_k - 1) * (y_{k+1} - x_k),
    using the same consistent theta recurrence at every k (including k = 0).
    The forms coincide through v_k = (y_k - x_k) / ((2 theta_k - 1) theta_k^2).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x = _start_trace(oracle, x0)
    y = x.copy()
    sched = theta_schedule(N)
    th = sched.theta
    L = oracle.L
    xs, ys = [x.copy()], [y.copy()]
    ks, counts, gnorms, fvals = [], [], [], []
    for k in range(N):
        ks.append(k)
        counts.append(oracle.count)
        g = oracle.grad_full(x)
        gnorms.append(np.linalg.norm(g))
        fvals.append(oracle.value(x))
        y_next = x - g / L
        c1 = (th[k] - 1.0) * (2.0 * th[k + 1] - 1.0) / (th[k] * (2.0 * th[k] - 1.0))
        c2 = (2.0 * th[k + 1] - 1.0) / (2.0 * th[k] - 1.0)
        x = y_next + c1 * (y_next - y) + c2 * (y_next - x)
        y = y_next
        if record_iterates:
            xs.append(x.copy())
            ys.append(y.copy())
    ks.append(N)
    counts.append(oracle.count)
    gnorms.append(np.linalg.norm(oracle.metric_grad(x)))
    fvals.append(oracle.value(x))
    trace = _finish("ogm-g-original", oracle, ks, counts, gnorms, fvals, x,
                    f_star, schedule_len=len(th))
    if record_iterates:
        trace.internal["x"] = np.asarray(xs)
        trace.internal["y"] = np.asarray(ys)
        trace.internal["theta"] = th
    return trace


def m_ogm_g_push_coef(k: int, N: int, L: float) -> float:
    """Weight of grad f(x_k) in the momentum accumulator of M-OGM-G."""
    return 12.0 / (L * (N - k + 1) * (N - k + 2) * (N - k + 3))


def m_ogm_g_pull_coef(k: int, N: int) -> float:
    """Weight of the accumulator in the iterate update of M-OGM-G."""
    return (N - k) * (N - k + 1) * (N - k + 2) / 6.0


def m_ogm_g_weight(k: int, N: int) -> float:
    """delta_{k+1} = 12/((N-k+1)(N-k+2)(N-k+3)), defined for k = 0..N."""
    return 12.0 / ((N - k + 1) * (N - k + 2) * (N - k + 3))


def run_m_ogm_g(oracle, x0, N: int, f_star: float | None = None,
                output: str = "last") -> DetTrace:
    """Memory-saving variant of OGM-G: coefficients computed on the fly.

    v_{k+1} = v_k + 12 / (L (N-k+1)(N-k+2)(N-k+3)) grad f(x_k),
    x_{k+1} = x_k - (1/L) grad f(x_k) - ((N-k)(N-k+1)(N-k+2)/6) v_{k+1}.

    ``output`` selects the returned point: "last" for x_N or "min_grad" for
    the iterate among x_0..x_N with the smallest gradient norm. Beyond the
    trace, only O(d) state is kept; the returned trace's ``schedule_len`` is
    0 because no per-iteration parameter array exists.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if output not in ("last", "min_grad"):
        raise ValueError("output must be 'last' or 'min_grad'")
    x = _start_trace(oracle, x0)
    L = oracle.L
    v = np.zeros_like(x)
    best_x, best_norm = x.copy(), math.inf
    ks, counts, gnorms, fvals = [], [], [], []
    for k in range(N):
        ks.append(k)
        counts.append(oracle.count)
        g = oracle.grad_full(x)
        gn = float(np.linalg.norm(g))
        gnorms.append(gn)
        fvals.append(oracle.value(x))
        if gn < best_norm:
            best_norm, best_x = gn, x.copy()
        v = v + m_ogm_g_push_coef(k, N, L) * g
        x = x - g / L - m_ogm_g_pull_coef(k, N) * v
    gn = float(np.linalg.norm(oracle.metric_grad(x)))
    if gn < best_norm:
        best_norm, best_x = gn, x.copy()
    ks.append(N)
    counts.append(oracle.count)
    gnorms.append(gn)
    fvals.append(oracle.value(x))
    out = x if output == "last" else best_x
    return _finish("m-ogm-g", oracle, ks, counts, gnorms, fvals, x, f_star,
                   output_x=out)


def chain(solver_a, solver_b, split: float = 0.5):
    """Compose two runners: A consumes its budget share, B starts at A's output.

    Odd budgets give the extra iteration to phase A; a zero-budget phase is
    the identity map. Oracle counting is continuous because both phases share
    the caller's oracle; the traces are concatenated (phase B's duplicate
    event at the handoff point is dropped).
    """
    if not 0.0 <= split <= 1.0:
        raise ValueError("split must be in [0, 1]")

    def run(oracle, x0, N, f_star=None):
        n_a = math.ceil(N * split)
        n_b = N - n_a
        x0 = _as_vector(x0, oracle.d)
        if n_a > 0:
            tr_a = solver_a(oracle, x0, n_a, f_star)
            mid = tr_a.final_x
        else:
            tr_a = None
            mid = x0.copy()
        if n_b > 0:
            tr_b = solver_b(oracle, mid, n_b, f_star)
        else:
            tr_b = None
        if tr_a is None:
            return tr_b
        if tr_b is None:
            return tr_a
        return DetTrace(
            method=f"{tr_a.method}+{tr_b.method}", n=oracle.n,
            ks=np.concatenate([tr_a.ks, tr_b.ks[1:] + n_a]),
            oracle_counts=np.concatenate([tr_a.oracle_counts,
                                          tr_b.oracle_counts[1:]]),
            grad_norms=np.concatenate([tr_a.grad_norms, tr_b.grad_norms[1:]]),
            f_values=np.concatenate([tr_a.f_values, tr_b.f_values[1:]]),
            final_x=tr_b.final_x, output_x=tr_b.output_x, f_star=f_star,
            schedule_len=max(tr_a.schedule_len, tr_b.schedule_len))

    return run


@dataclass(frozen=True)
class PotentialReplay:
    """Per-iteration audit of the OGM-G one-step inequality.

    ``slacks[k]`` is LHS - RHS of the inequality at iteration k (must be
    <= 0 up to rounding), and ``crossterm_total`` is the sum over k of the
    non-telescoping cross terms, which cancels exactly in exact arithmetic.
    """

    slacks: np.ndarray
    crossterm_total: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: np.ndarray

    @property
    def worst_slack(self) -> float:
        return float(self.slacks.max())


def verify_ogmg_potential(oracle, x0, N: int, f_star: float) -> PotentialReplay:
    """Replay :func:`run_ogm_g` and evaluate its one-step inequality.

    For each k the inequality couples the terms
      A_k = (f(x_N) - f* - ||g_N||^2/(2L)) / theta_k^2,
      B_k = (f(x_k) - f*) / theta_k^2,
      C_k = ||g_k||^2 / (2 L theta_k^2),
      E_k = (theta_{k+1}^2 / theta_k) <g_k, v_k>,
    with cross terms theta_{k+1} <g_{k+1}, v_{k+1}> and
    sum_{i=k+1}^N theta_i/(L theta_k theta_{k+1}^2) <g_k, g_i>.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x = _as_vector(x0, oracle.d).copy()
    sched = theta_schedule(N)
    # theta_{N+1} = 0 closes the recurrence for the E-terms
    th = np.append(sched.theta, 0.0)
    L = oracle.L

    grads = np.empty((N + 1, oracle.d))
    vs = np.zeros((N + 1, oracle.d))
    fvals = np.empty(N + 1)
    v = np.zeros_like(x)
    for k in range(N):
        g = oracle.grad_full(x)
        grads[k] = g
        fvals[k] = oracle.value(x)
        v = v + g / (L * th[k] * th[k + 1] ** 2)
        vs[k + 1] = v
        x = x - g / L - (2.0 * th[k + 1] ** 3 - th[k + 1] ** 2) * v
    grads[N] = oracle.metric_grad(x)
    fvals[N] = oracle.value(x)

    gaps = fvals - f_star
    sq = np.einsum("ij,ij->i", grads, grads)
    head = gaps[N] - sq[N] / (2.0 * L)

    def A(k):
        return head / th[k] ** 2

    def B(k):
        return gaps[k] / th[k] ** 2

    def C(k):
        return sq[k] / (2.0 * L * th[k] ** 2)

    def E(k):
        return (th[k + 1] ** 2 / th[k]) * float(grads[k] @ vs[k])

    slacks = np.empty(N)
    cross_total = 0.0
    for k in range(N):
        cross1 = th[k + 1] * float(grads[k + 1] @ vs[k + 1])
        cross2 = 0.0
        for i in range(k + 1, N + 1):
            cross2 += th[i] / (L * th[k] * th[k + 1] ** 2) * float(grads[k] @ grads[i])
        lhs = A(k) + B(k + 1) + C(k + 1) + E(k + 1)
        rhs = A(k + 1) + B(k) + C(k) + E(k) - cross1 + cross2
        slacks[k] = lhs - rhs
        cross_total += cross1 - cross2

    terms_A = np.array([A(k) for k in range(N + 1)])
    terms_B = np.array([B(k) for k in range(N + 1)])
    terms_C = np.array([C(k) for k in range(N + 1)])
    terms_E = np.array([E(k) for k in range(N + 1)])
    return PotentialReplay(slacks=slacks, crossterm_total=float(cross_total),
                           A=terms_A, B=terms_B, C=terms_C, E=terms_E)
