import math

import numpy as np
import pytest

from smallgrad import (CountingOracle, Mode, derive_inner_params,
                       inner_break_iteration, make_logistic, prepare,
                       reference_minimum, run_r_acc_svrg_g,
                       run_regularized_inner, solve_alpha, synth_dataset)
from smallgrad.adaptive import break_threshold, cubic_residual

from conftest import random_quadratic

# (n, delta/L) grid shared by the root-quality checks
GRID = [(n, r) for n in (1, 2, 5, 10, 100)
        for r in (1.0, 0.25, 1e-2, 1e-5)]


class TestSolveAlpha:
    def test_unit_instance_against_polynomial_oracle(self):
        # n = 1, delta = L: the cubic is x^3 + x^2 - 2x - 1
        roots = np.roots([1.0, 1.0, -2.0, -1.0])
        expected = max(r.real for r in roots if abs(r.imag) < 1e-12)
        assert expected == pytest.approx(1.2469796037174672, rel=1e-12)
        assert solve_alpha(1.0, 1.0, 1) == pytest.approx(expected, rel=1e-10)

    def test_n10_instance_against_polynomial_oracle(self):
        # n = 10, delta = L: x^3 - 17x^2 - 47x - 19
        roots = np.roots([1.0, -17.0, -47.0, -19.0])
        expected = max(r.real for r in roots if abs(r.imag) < 1e-12)
        got = solve_alpha(1.0, 1.0, 10)
        assert got == pytest.approx(expected, rel=1e-10)
        assert got <= 20.0 + 2.0 * math.sqrt(20.0)

    @pytest.mark.parametrize("n,ratio", GRID)
    def test_product_identity_on_grid(self, n, ratio):
        L = 0.25
        delta = ratio * L
        alpha = solve_alpha(delta, L, n)
        p = 1.0 / n
        resid = abs((1.0 - p * (alpha + delta) / (alpha + L + delta))
                    * (1.0 + delta / alpha) ** 2 - 1.0)
        assert resid <= 1e-10
        kappa = (L + delta) / delta
        assert 0.0 < alpha / delta <= 2 * n + 2 * math.sqrt(n * kappa) + 1e-9
        # the bracketed function really crosses zero at the root
        assert cubic_residual(alpha / delta * (1 - 1e-6), n, kappa) < 0

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            solve_alpha(0.0, 1.0, 2)
        with pytest.raises(ValueError):
            solve_alpha(1.0, 1.0, 0)


class TestInnerParams:
    @pytest.mark.parametrize("n,ratio", GRID)
    def test_coupling_identity_and_bounds(self, n, ratio):
        L = 1.0
        delta = ratio * L
        alpha = solve_alpha(delta, L, n)
        st = derive_inner_params(alpha, delta, L, n)
        lhs = (1.0 - st.tau_x) / st.tau_x
        rhs = (1.0 - delta * st.tau_z / st.tau_x) * L / alpha
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)
        assert st.c_idc <= L ** 2 + 6.0 * L * delta + 1e-12
        assert st.c_ifc <= 14.0 * L + 1e-12
        x = alpha / delta
        kappa = st.kappa
        assert (x + 1.0) ** 2 / (n * (x + kappa)) <= 6.0 + 1e-12

    def test_all_quantities_finite_positive(self):
        alpha = solve_alpha(1.0, 1.0, 1)
        st = derive_inner_params(alpha, 1.0, 1.0, 1)
        for value in (st.alpha, st.tau_x, st.p, st.c_idc, st.c_ifc):
            assert np.isfinite(value) and value > 0


class TestInnerBreak:
    def test_threshold_at_most_one_gives_one(self):
        # a huge delta pushes both thresholds below 1
        L, n = 1.0, 3
        delta = 100.0 * L
        st = derive_inner_params(solve_alpha(delta, L, n), delta, L, n)
        assert break_threshold(st, Mode.IDC) < 1.0
        assert inner_break_iteration(st, Mode.IDC) == 1

    @pytest.mark.parametrize("mode", [Mode.IDC, Mode.IFC])
    def test_ceiling_definition(self, mode):
        L, n = 1.0, 10
        for ratio in (0.5, 1e-2, 1e-4):
            delta = ratio * L
            st = derive_inner_params(solve_alpha(delta, L, n), delta, L, n)
            k = inner_break_iteration(st, mode)
            th = break_threshold(st, mode)
            r = 1.0 + delta / st.alpha
            assert r ** k >= th
            if k > 1:
                assert r ** (k - 1) < th

    def test_matches_exhaustive_scan(self):
        L, n = 1.0, 10
        st = derive_inner_params(solve_alpha(1.0, L, n), 1.0, L, n)
        for mode in (Mode.IDC, Mode.IFC):
            th = break_threshold(st, mode)
            r = 1.0 + st.delta / st.alpha
            k = 1
            while r ** k < th:
                k += 1
            assert inner_break_iteration(st, mode) == k


class TestInnerRound:
    def test_contraction_bound_idc(self, rng):
        obj = random_quadratic(rng, d=4, n=4)
        ref = reference_minimum(obj)
        x0 = rng.standard_normal(4)
        R0 = float(np.linalg.norm(x0 - ref.x_star))
        delta = 0.3 * obj.L
        norms = []
        for seed in range(150):
            res = run_regularized_inner(CountingOracle(obj), x0, delta,
                                        Mode.IDC, seed=seed)
            norms.append(res.base_grad_norm)
        st = res.state
        ratio = 1.0 + delta / st.alpha
        k = res.iterations
        bound = (delta + ratio ** -k * math.sqrt(st.c_idc)) * R0
        se = np.std(norms) / math.sqrt(len(norms))
        assert np.mean(norms) <= 1.1 * bound + 3.0 * se
        # past the break iteration the contraction term is below delta,
        # collapsing the bound to 2 delta R0
        assert np.mean(norms) <= 1.1 * 2.0 * delta * R0 + 3.0 * se

    def test_contraction_bound_ifc(self, rng):
        obj = random_quadratic(rng, d=4, n=4)
        ref = reference_minimum(obj)
        x0 = rng.standard_normal(4)
        D0 = float(obj.value(x0) - ref.f_star)
        delta = 0.3 * obj.L
        norms = []
        for seed in range(150):
            res = run_regularized_inner(CountingOracle(obj), x0, delta,
                                        Mode.IFC, seed=seed)
            norms.append(res.base_grad_norm)
        st = res.state
        ratio = 1.0 + delta / st.alpha
        bound = (math.sqrt(2.0 * delta)
                 + ratio ** -res.iterations * math.sqrt(st.c_ifc)) \
            * math.sqrt(D0)
        se = np.std(norms) / math.sqrt(len(norms))
        assert np.mean(norms) <= 1.1 * bound + 3.0 * se

    def test_early_iterations_follow_proposition_bound(self, rng):
        obj = random_quadratic(rng, d=4, n=4)
        ref = reference_minimum(obj)
        x0 = rng.standard_normal(4)
        R0 = float(np.linalg.norm(x0 - ref.x_star))
        delta = 0.3 * obj.L
        k = 5
        norms = []
        for seed in range(150):
            res = run_regularized_inner(CountingOracle(obj), x0, delta,
                                        Mode.IDC, seed=seed, num_iters=k)
            norms.append(res.base_grad_norm)
        st = res.state
        bound = (delta + (1.0 + delta / st.alpha) ** -k
                 * math.sqrt(st.c_idc)) * R0
        se = np.std(norms) / math.sqrt(len(norms))
        assert np.mean(norms) <= 1.1 * bound + 3.0 * se


class TestRunner:
    def test_already_stationary_start(self, rng):
        obj = random_quadratic(rng, d=4, n=3)
        ref = reference_minimum(obj)
        o = CountingOracle(obj)
        out = run_r_acc_svrg_g(o, ref.x_star, eps=1e-6, seed=0)
        assert out.terminated
        assert out.rounds == 1
        assert out.trace.num_steps == 0
        assert out.oracle_count == obj.n  # one maintained full gradient

    def test_rejects_bad_inputs(self, rng):
        obj = random_quadratic(rng, d=3)
        o = CountingOracle(obj)
        with pytest.raises(ValueError):
            run_r_acc_svrg_g(o, np.zeros(3), eps=0.0)
        with pytest.raises(ValueError):
            run_r_acc_svrg_g(o, np.zeros(3), eps=1e-3, beta=1.0)

    def test_max_outer_exhaustion(self, rng):
        obj = random_quadratic(rng, d=3, n=2)
        o = CountingOracle(obj)
        out = run_r_acc_svrg_g(o, np.ones(3), eps=1e-300, max_outer=2, seed=0)
        assert not out.terminated
        assert out.rounds == 2
        assert out.final_delta == pytest.approx(obj.L / 2.0)

    def test_terminates_with_certified_gradient(self, rng):
        ds = prepare(synth_dataset(3, 200, 10, separability=0.5))
        obj = make_logistic(ds)
        eps = 1e-3
        for mode in (Mode.IDC, Mode.IFC):
            o = CountingOracle(obj)
            out = run_r_acc_svrg_g(o, np.zeros(obj.d), eps=eps, mode=mode,
                                   seed=1)
            assert out.terminated
            assert np.linalg.norm(obj.grad(out.output)) <= eps
            assert out.final_delta == pytest.approx(
                obj.L / 2.0 ** (out.rounds - 1))
            tr = out.trace
            assert o.count == obj.n * tr.num_snapshots + 2 * tr.num_steps

    def test_budget_guard_stops_run(self, rng):
        obj = random_quadratic(rng, d=4, n=5)
        o = CountingOracle(obj)
        out = run_r_acc_svrg_g(o, np.ones(4), eps=1e-300, max_outer=64,
                               max_oracle_calls=500, seed=0)
        assert not out.terminated
        assert out.oracle_count <= 500 + obj.n + 2
