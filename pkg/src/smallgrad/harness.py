"""Experiment runner: multi-seed, multi-method benchmark sweeps.

A config names a dataset (file-backed or synthetic), a list of methods with
parameters, an oracle budget in passes over the data (1 pass = n component
gradients), and the seeds to run. Every (method, seed) pair runs
independently against its own counting oracle; results aggregate into
oracle-indexed event tables and per-pass summary statistics (mean and
+-1 std of the log10 metric across seeds). Runs are pure given the config,
so two invocations produce byte-identical CSV output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import adaptive, deterministic, stochastic
from .datasets import parse_libsvm, prepare, synth_dataset
from .objectives import make_logistic, make_quadratic
from .oracles import CountingOracle
from .reference import reference_minimum

TRACE_COLUMNS = ("method", "seed", "event_index", "oracle_calls", "passes",
                 "grad_norm_min_tracked", "grad_norm_event", "f_gap")
SUMMARY_COLUMNS = ("method", "passes", "mean_log10_metric",
                   "std_log10_metric")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class MethodSpec:
    name: str
    label: str
    params: dict


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: dict
    methods: tuple
    budget_passes: float
    seeds: tuple
    metric_cadence_passes: float | None = 1.0
    out_dir: str | None = None


@dataclass
class RunRecord:
    """One (method, seed) run flattened to plot-ready event rows."""

    label: str
    seed: int
    n: int
    oracle_calls: np.ndarray
    grad_norms: np.ndarray
    f_gaps: np.ndarray

    @property
    def passes(self) -> np.ndarray:
        return self.oracle_calls / self.n

    @property
    def min_tracked(self) -> np.ndarray:
        return np.minimum.accumulate(self.grad_norms)


@dataclass
class SummaryStats:
    method: str
    metric: str
    passes: np.ndarray
    mean_log10: np.ndarray
    std_log10: np.ndarray


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    runs: list
    summaries: dict  # metric name -> list[SummaryStats]
    f_star: float


# ---------------------------------------------------------------------------
# method registry

@dataclass(frozen=True)
class MethodInfo:
    name: str
    kind: str  # "deterministic" | "stochastic"
    description: str
    allowed_params: tuple


METHODS = {
    m.name: m for m in [
        MethodInfo("gd", "deterministic", "gradient descent, step 1/L", ()),
        MethodInfo("nag", "deterministic",
                   "Nesterov acceleration for convex objectives", ()),
        MethodInfo("ogm-g", "deterministic",
                   "gradient-norm-optimal method, momentum form "
                   "(stores an O(N) coefficient schedule)", ()),
        MethodInfo("ogm-g-original", "deterministic",
                   "gradient-norm-optimal method, two-sequence form", ()),
        MethodInfo("m-ogm-g", "deterministic",
                   "memory-saving variant with on-the-fly coefficients",
                   ("output",)),
        MethodInfo("nag+m-ogm-g", "deterministic",
                   "half budget of NAG chained into m-ogm-g", ("split",)),
        MethodInfo("acc-svrg-g", "stochastic",
                   "accelerated loopless SVRG with gradient-norm guarantees",
                   ("schedule", "output", "K")),
        MethodInfo("acc-svrg-g-low", "stochastic",
                   "constant-parameter variant stopped at the first "
                   "snapshot flip (O(n) cost)", ()),
        MethodInfo("svrg", "stochastic",
                   "loopless SVRG baseline, step 1/(4L)", ("step",)),
        MethodInfo("saga", "stochastic",
                   "SAGA baseline with stored gradient table, step 1/(3L)",
                   ("step", "table_cap_bytes")),
        MethodInfo("l2s", "stochastic",
                   "loopless SARAH baseline; step c/L or 1/(L sqrt(n))",
                   ("step_kind", "c")),
        MethodInfo("r-acc-svrg-g", "stochastic",
                   "adaptively regularized accelerated SVRG for "
                   "eps-stationarity", ("eps", "beta", "mode", "max_outer")),
    ]
}


def list_methods() -> list:
    return [METHODS[name] for name in sorted(METHODS)]


# ---------------------------------------------------------------------------
# config loading / validation

def _method_spec(entry, idx) -> MethodSpec:
    if not isinstance(entry, dict) or "name" not in entry:
        raise ConfigError(f"methods[{idx}] must be a mapping with a 'name'")
    params = {k: v for k, v in entry.items() if k not in ("name", "label")}
    return MethodSpec(name=str(entry["name"]),
                      label=str(entry.get("label", entry["name"])),
                      params=params)


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    try:
        methods = tuple(_method_spec(m, i)
                        for i, m in enumerate(raw.get("methods", [])))
        cfg = ExperimentConfig(
            dataset=dict(raw.get("dataset", {})),
            methods=methods,
            budget_passes=float(raw.get("budget_passes", 0)),
            seeds=tuple(int(s) for s in raw.get("seeds", [])),
            metric_cadence_passes=raw.get("metric_cadence_passes", 1.0),
            out_dir=raw.get("out_dir"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc))
    return cfg


def validate_config(cfg: ExperimentConfig) -> list:
    """All problems found, empty when the config is runnable."""
    problems = []
    kind = cfg.dataset.get("kind")
    if kind == "libsvm":
        path = cfg.dataset.get("path")
        if not path or not Path(path).is_file():
            problems.append(f"dataset path {path!r} is not readable")
    elif kind == "synthetic":
        for key in ("n", "d"):
            if int(cfg.dataset.get(key, 0)) < 1:
                problems.append(f"synthetic dataset needs {key} >= 1")
    elif kind == "quadratic":
        if int(cfg.dataset.get("d", 0)) < 1:
            problems.append("quadratic dataset needs d >= 1")
    else:
        problems.append(f"unknown dataset kind {kind!r}")
    if cfg.budget_passes <= 0:
        problems.append("budget_passes must be > 0")
    if not cfg.seeds:
        problems.append("seeds must be non-empty")
    if not cfg.methods:
        problems.append("methods must be non-empty")
    labels = [m.label for m in cfg.methods]
    if len(set(labels)) != len(labels):
        problems.append("method labels must be unique (set 'label')")
    for spec in cfg.methods:
        info = METHODS.get(spec.name)
        if info is None:
            problems.append(f"unknown method {spec.name!r}")
            continue
        for key in spec.params:
            if key not in info.allowed_params:
                problems.append(
                    f"method {spec.label!r}: unknown parameter {key!r}")
        if spec.name == "r-acc-svrg-g" and "eps" not in spec.params:
            problems.append(f"method {spec.label!r}: 'eps' is required")
        if spec.name == "acc-svrg-g" \
                and spec.params.get("output") == "grad_sample" \
                and "K" not in spec.params:
            problems.append(
                f"method {spec.label!r}: grad_sample output needs a fixed K")
    return problems


def build_objective(dataset: dict):
    """Objective named by a config's dataset block; deterministic."""
    kind = dataset.get("kind")
    if kind == "libsvm":
        ds = parse_libsvm(dataset["path"],
                          strict_labels=bool(dataset.get("strict_labels",
                                                         False)))
        ds = prepare(ds, bias=bool(dataset.get("bias", True)),
                     normalize=bool(dataset.get("normalize", True)),
                     bias_first=bool(dataset.get("bias_first", True)))
        return make_logistic(ds)
    if kind == "synthetic":
        ds = synth_dataset(int(dataset.get("seed", 0)), int(dataset["n"]),
                           int(dataset["d"]),
                           float(dataset.get("separability", 0.8)))
        ds = prepare(ds, bias=bool(dataset.get("bias", True)),
                     normalize=bool(dataset.get("normalize", True)))
        return make_logistic(ds)
    if kind == "quadratic":
        d = int(dataset["d"])
        rng = np.random.default_rng(int(dataset.get("seed", 0)))
        cond = float(dataset.get("condition", 10.0))
        eigvals = np.logspace(-math.log10(cond), 0.0, d)
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        A = (Q * eigvals) @ Q.T
        A = 0.5 * (A + A.T)
        b = rng.standard_normal(d)
        return make_quadratic(A, b, n=int(dataset.get("n_components", 1)),
                              seed=int(dataset.get("seed", 0)))
    raise ConfigError(f"unknown dataset kind {kind!r}")


# ---------------------------------------------------------------------------
# running

def _run_one(spec: MethodSpec, objective, x0, cfg: ExperimentConfig,
             seed: int, f_star: float) -> RunRecord:
    oracle = CountingOracle(objective)
    budget_calls = int(round(cfg.budget_passes * objective.n))
    name, params = spec.name, spec.params

    if METHODS[name].kind == "deterministic":
        N = max(int(cfg.budget_passes), 1)
        if name == "gd":
            tr = deterministic.run_gd(oracle, x0, N, f_star)
        elif name == "nag":
            tr = deterministic.run_nag(oracle, x0, N, f_star)
        elif name == "ogm-g":
            tr = deterministic.run_ogm_g(oracle, x0, N, f_star)
        elif name == "ogm-g-original":
            tr = deterministic.run_ogm_g_original(oracle, x0, N, f_star)
        elif name == "m-ogm-g":
            tr = deterministic.run_m_ogm_g(
                oracle, x0, N, f_star, output=params.get("output", "last"))
        else:  # nag+m-ogm-g
            run = deterministic.chain(deterministic.run_nag,
                                      deterministic.run_m_ogm_g,
                                      float(params.get("split", 0.5)))
            tr = run(oracle, x0, N, f_star)
        return RunRecord(label=spec.label, seed=seed, n=objective.n,
                         oracle_calls=np.asarray(tr.oracle_counts, float),
                         grad_norms=np.asarray(tr.grad_norms, float),
                         f_gaps=np.asarray(tr.f_gaps, float))

    if name == "acc-svrg-g":
        kind = stochastic.ScheduleKind(params.get("schedule", "two-stage"))
        if "K" in params:
            res = stochastic.run_acc_svrg_g(
                oracle, x0, int(params["K"]), kind, seed,
                output=params.get("output", "grad_sample"), f_star=f_star)
        else:
            res = stochastic.run_acc_svrg_g(
                oracle, x0, budget_calls, kind, seed,
                output=params.get("output", "min_tracked"), f_star=f_star,
                max_oracle_calls=budget_calls)
        trace = res.trace
    elif name == "acc-svrg-g-low":
        trace = stochastic.run_acc_svrg_g_low_accuracy(
            oracle, x0, seed, f_star=f_star).trace
    elif name == "svrg":
        trace = stochastic.run_svrg(oracle, x0, cfg.budget_passes, seed,
                                    step=params.get("step"),
                                    f_star=f_star).trace
    elif name == "saga":
        trace = stochastic.run_saga(
            oracle, x0, cfg.budget_passes, seed, step=params.get("step"),
            f_star=f_star,
            table_cap_bytes=int(params.get("table_cap_bytes", 1 << 30)),
            metric_every_passes=cfg.metric_cadence_passes).trace
    elif name == "l2s":
        eta = stochastic.l2s_step_size(
            objective.L, objective.n,
            kind=params.get("step_kind", "n-independent"),
            c=float(params.get("c", 0.25)))
        trace = stochastic.run_l2s(oracle, x0, budget_calls, eta, seed,
                                   f_star=f_star,
                                   max_oracle_calls=budget_calls).trace
    elif name == "r-acc-svrg-g":
        outcome = adaptive.run_r_acc_svrg_g(
            oracle, x0, float(params["eps"]),
            beta=float(params.get("beta", 2.0)),
            mode=adaptive.Mode(params.get("mode", "idc")), seed=seed,
            max_outer=int(params.get("max_outer", 64)),
            max_oracle_calls=budget_calls)
        trace = outcome.trace
        trace.f_star = f_star
    else:
        raise ConfigError(f"unknown method {name!r}")

    return RunRecord(label=spec.label, seed=seed, n=objective.n,
                     oracle_calls=np.asarray(trace.oracle_counts, float),
                     grad_norms=np.asarray(trace.grad_norms, float),
                     f_gaps=np.asarray(trace.f_gaps, float))


def _step_sample(xs, ys, grid):
    """Last recorded y at or before each grid point (step interpolation)."""
    out = np.empty(len(grid))
    j = -1
    for gi, g in enumerate(grid):
        while j + 1 < len(xs) and xs[j + 1] <= g:
            j += 1
        out[gi] = ys[j] if j >= 0 else ys[0]
    return out


def summarize(runs, budget_passes: float, metric: str) -> list:
    """Per-method mean/std of log10(metric) on the integer pass grid.

    ``metric`` is "grad_norm_min" (running minimum of recorded gradient
    norms, the headline benchmark quantity) or "f_gap" (last recorded value).
    Deviation bands are computed on log10 so they match log-scale plots.
    """
    grid = np.arange(0, int(math.floor(budget_passes)) + 1, dtype=float)
    by_method: dict[str, list] = {}
    for run in runs:
        by_method.setdefault(run.label, []).append(run)
    stats = []
    for label in sorted(by_method):
        rows = []
        for run in sorted(by_method[label], key=lambda r: r.seed):
            if metric == "grad_norm_min":
                ys = run.min_tracked
            elif metric == "f_gap":
                ys = run.f_gaps
            else:
                raise ValueError(f"unknown metric {metric!r}")
            sampled = _step_sample(run.passes, ys, grid)
            rows.append(np.log10(np.maximum(sampled, 1e-300)))
        mat = np.vstack(rows)
        stats.append(SummaryStats(method=label, metric=metric, passes=grid,
                                  mean_log10=mat.mean(axis=0),
                                  std_log10=mat.std(axis=0)))
    return stats


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run every (method, seed) pair; deterministic given the config."""
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    objective = build_objective(cfg.dataset)
    ref = reference_minimum(objective)
    x0 = np.zeros(objective.d)
    runs = []
    for spec in cfg.methods:
        for seed in cfg.seeds:
            runs.append(_run_one(spec, objective, x0, cfg, seed, ref.f_star))
    summaries = {m: summarize(runs, cfg.budget_passes, m)
                 for m in ("grad_norm_min", "f_gap")}
    return ExperimentResult(config=cfg, runs=runs, summaries=summaries,
                            f_star=ref.f_star)


# ---------------------------------------------------------------------------
# emission

def _fmt(x) -> str:
    return repr(float(x))


def emit_csv(runs, path) -> None:
    """Event table with exactly the TRACE_COLUMNS header."""
    if not runs:
        raise ValueError("no traces to emit")
    ordered = sorted(runs, key=lambda r: (r.label, r.seed))
    with open(path, "w") as fh:
        fh.write(",".join(TRACE_COLUMNS) + "\n")
        for run in ordered:
            mins = run.min_tracked
            passes = run.passes
            for j in range(len(run.oracle_calls)):
                fh.write(",".join([
                    run.label, str(run.seed), str(j),
                    str(int(run.oracle_calls[j])), _fmt(passes[j]),
                    _fmt(mins[j]), _fmt(run.grad_norms[j]),
                    _fmt(run.f_gaps[j]),
                ]) + "\n")


def emit_summary(stats, path) -> None:
    """Summary table with exactly the SUMMARY_COLUMNS header."""
    if not stats:
        raise ValueError("no summary statistics to emit")
    with open(path, "w") as fh:
        fh.write(",".join(SUMMARY_COLUMNS) + "\n")
        for st in sorted(stats, key=lambda s: s.method):
            for j in range(len(st.passes)):
                fh.write(",".join([
                    st.method, _fmt(st.passes[j]), _fmt(st.mean_log10[j]),
                    _fmt(st.std_log10[j]),
                ]) + "\n")


def write_report(result: ExperimentResult, out_dir, figures: bool = True) -> dict:
    """Write trace CSV, per-metric summary CSVs and (optionally) figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"traces": out / "traces.csv"}
    emit_csv(result.runs, paths["traces"])
    for metric, stats in result.summaries.items():
        key = f"summary_{metric}"
        paths[key] = out / f"{key}.csv"
        emit_summary(stats, paths[key])
    if figures:
        from .plots import render_summary_figure
        labels = {"grad_norm_min": "min tracked gradient norm",
                  "f_gap": "function-value gap"}
        for metric, stats in result.summaries.items():
            fig_path = out / f"fig_{metric}.png"
            render_summary_figure(stats, labels[metric], fig_path)
            paths[f"fig_{metric}"] = fig_path
    return paths
