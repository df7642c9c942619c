import numpy as np
import pytest
import yaml

from smallgrad import CountingOracle, run_gd
from smallgrad.cli import main as cli_main
from smallgrad.harness import (ConfigError, ExperimentConfig, MethodSpec,
                               build_objective, emit_csv, emit_summary,
                               load_config, run_experiment, summarize,
                               validate_config, write_report)

QUAD_DATASET = {"kind": "quadratic", "d": 8, "n_components": 4, "seed": 3}


def make_config(**overrides):
    base = dict(
        dataset=dict(QUAD_DATASET),
        methods=(MethodSpec("gd", "gd", {}),),
        budget_passes=5.0,
        seeds=(0,),
        metric_cadence_passes=1.0,
        out_dir=None,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestValidation:
    def test_good_config_has_no_problems(self):
        assert validate_config(make_config()) == []

    def test_unknown_method(self):
        cfg = make_config(methods=(MethodSpec("bogus", "bogus", {}),))
        assert any("unknown method" in p for p in validate_config(cfg))

    def test_unknown_parameter(self):
        cfg = make_config(methods=(MethodSpec("gd", "gd", {"lr": 0.1}),))
        assert any("unknown parameter" in p for p in validate_config(cfg))

    def test_required_eps(self):
        cfg = make_config(
            methods=(MethodSpec("r-acc-svrg-g", "radapt", {}),))
        assert any("'eps' is required" in p for p in validate_config(cfg))

    def test_duplicate_labels(self):
        cfg = make_config(methods=(MethodSpec("gd", "x", {}),
                                   MethodSpec("nag", "x", {})))
        assert any("unique" in p for p in validate_config(cfg))

    def test_unreadable_dataset(self):
        cfg = make_config(dataset={"kind": "libsvm", "path": "/nope/xx"})
        assert any("not readable" in p for p in validate_config(cfg))

    def test_empty_budget_seeds_methods(self):
        cfg = make_config(budget_passes=0.0, seeds=(), methods=())
        msgs = validate_config(cfg)
        assert len(msgs) >= 3

    def test_run_experiment_raises_before_running(self):
        with pytest.raises(ConfigError):
            run_experiment(make_config(budget_passes=-1.0))


class TestRunExperiment:
    def test_gd_run_is_passthrough(self):
        cfg = make_config()
        result = run_experiment(cfg)
        objective = build_objective(cfg.dataset)
        from smallgrad import reference_minimum
        ref = reference_minimum(objective)
        direct = run_gd(CountingOracle(objective), np.zeros(objective.d), 5,
                        ref.f_star)
        run = result.runs[0]
        assert np.allclose(run.grad_norms, direct.grad_norms, atol=0)
        assert np.allclose(run.oracle_calls, direct.oracle_counts, atol=0)
        assert np.allclose(run.f_gaps, direct.f_gaps, atol=0)

    def test_gd_three_iterations_gives_four_rows(self, tmp_path):
        cfg = make_config(budget_passes=3.0)
        result = run_experiment(cfg)
        path = tmp_path / "traces.csv"
        emit_csv(result.runs, path)
        rows = path.read_text().strip().splitlines()
        assert len(rows) == 1 + 4  # header + k = 0..3

    def test_deterministic_methods_have_zero_std(self):
        cfg = make_config(seeds=(0, 1, 2, 3))
        result = run_experiment(cfg)
        for stats in result.summaries["grad_norm_min"]:
            assert np.all(stats.std_log10 == 0.0)

    def test_pass_accounting_exact(self):
        cfg = make_config(methods=(MethodSpec("svrg", "svrg", {}),),
                          seeds=(0,), budget_passes=4.0)
        result = run_experiment(cfg)
        run = result.runs[0]
        assert np.allclose(run.passes * run.n, run.oracle_calls, atol=0)

    def test_stochastic_summary_grid_is_monotone(self):
        cfg = make_config(methods=(MethodSpec("acc-svrg-g", "acc",
                                              {"schedule": "single-stage"}),),
                          seeds=(0, 1), budget_passes=6.0)
        result = run_experiment(cfg)
        st = result.summaries["grad_norm_min"][0]
        assert np.all(np.diff(st.mean_log10) <= 1e-12)

    def test_all_methods_smoke(self):
        methods = tuple(
            MethodSpec(name, name, {"eps": 1e-2} if name == "r-acc-svrg-g"
                       else {})
            for name in ("gd", "nag", "ogm-g", "ogm-g-original", "m-ogm-g",
                         "nag+m-ogm-g", "acc-svrg-g", "acc-svrg-g-low",
                         "svrg", "saga", "l2s", "r-acc-svrg-g"))
        cfg = make_config(methods=methods, budget_passes=4.0)
        result = run_experiment(cfg)
        assert len(result.runs) == len(methods)
        assert len(result.summaries["grad_norm_min"]) == len(methods)


class TestEmission:
    def test_empty_traces_error_without_file(self, tmp_path):
        path = tmp_path / "never.csv"
        with pytest.raises(ValueError):
            emit_csv([], path)
        assert not path.exists()
        with pytest.raises(ValueError):
            emit_summary([], path)
        assert not path.exists()

    def test_byte_identical_reruns(self, tmp_path):
        cfg = make_config(methods=(MethodSpec("svrg", "svrg", {}),
                                   MethodSpec("gd", "gd", {})),
                          seeds=(0, 1), budget_passes=4.0)
        blobs = []
        for tag in ("a", "b"):
            result = run_experiment(cfg)
            out = tmp_path / tag
            paths = write_report(result, out, figures=False)
            blobs.append((paths["traces"].read_bytes(),
                          paths["summary_grad_norm_min"].read_bytes(),
                          paths["summary_f_gap"].read_bytes()))
        assert blobs[0] == blobs[1]

    def test_headers_match_contract(self, tmp_path):
        cfg = make_config()
        result = run_experiment(cfg)
        paths = write_report(result, tmp_path, figures=False)
        header = paths["traces"].read_text().splitlines()[0]
        assert header == ("method,seed,event_index,oracle_calls,passes,"
                          "grad_norm_min_tracked,grad_norm_event,f_gap")
        sheader = paths["summary_grad_norm_min"].read_text().splitlines()[0]
        assert sheader == "method,passes,mean_log10_metric,std_log10_metric"

    def test_figures_rendered(self, tmp_path):
        cfg = make_config(seeds=(0, 1))
        result = run_experiment(cfg)
        paths = write_report(result, tmp_path, figures=True)
        for key in ("fig_grad_norm_min", "fig_f_gap"):
            assert paths[key].stat().st_size > 0

    def test_summarize_rejects_unknown_metric(self):
        result = run_experiment(make_config())
        with pytest.raises(ValueError):
            summarize(result.runs, 5.0, "wallclock")


class TestCli:
    def write_cfg(self, tmp_path, **extra):
        raw = {
            "dataset": dict(QUAD_DATASET),
            "budget_passes": 4,
            "seeds": [0, 1],
            "methods": [{"name": "gd"}, {"name": "svrg"}],
            **extra,
        }
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump(raw))
        return path

    def test_validate_ok(self, tmp_path, capsys):
        path = self.write_cfg(tmp_path)
        assert cli_main(["validate", "--config", str(path)]) == 0
        assert "config OK" in capsys.readouterr().out

    def test_validate_bad_config_exits_2(self, tmp_path):
        path = self.write_cfg(tmp_path, methods=[{"name": "bogus"}])
        with pytest.raises(SystemExit) as err:
            cli_main(["validate", "--config", str(path)])
        assert err.value.code == 2

    def test_run_writes_outputs(self, tmp_path):
        path = self.write_cfg(tmp_path)
        out = tmp_path / "out"
        assert cli_main(["run", "--config", str(path), "--out", str(out),
                         "--no-figures"]) == 0
        assert (out / "traces.csv").is_file()
        assert (out / "summary_grad_norm_min.csv").is_file()
        assert (out / "summary_f_gap.csv").is_file()

    def test_run_without_outdir_exits_2(self, tmp_path):
        path = self.write_cfg(tmp_path)
        assert cli_main(["run", "--config", str(path)]) == 2

    def test_list_methods(self, capsys):
        assert cli_main(["list-methods"]) == 0
        out = capsys.readouterr().out
        for name in ("gd", "acc-svrg-g", "r-acc-svrg-g", "saga"):
            assert name in out

    def test_load_config_round_trip(self, tmp_path):
        path = self.write_cfg(tmp_path, out_dir="results")
        cfg = load_config(path)
        assert cfg.out_dir == "results"
        assert cfg.budget_passes == 4.0
        assert [m.name for m in cfg.methods] == ["gd", "svrg"]
