"""First-order methods for finding near-stationary points of smooth convex
finite-sums, with exact oracle accounting and a benchmark harness."""

from .adaptive import (Mode, Outcome, RegularizationState,
                       derive_inner_params, inner_break_iteration,
                       run_r_acc_svrg_g, run_regularized_inner, solve_alpha)
from .datasets import (ParseError, SparseDataset, append_bias, normalize_rows,
                       parse_libsvm, prepare, serialize_libsvm, synth_dataset)
from .deterministic import (PotentialReplay, ThetaSchedule, chain, run_gd,
                            run_m_ogm_g, run_nag, run_ogm_g,
                            run_ogm_g_original, theta_schedule,
                            verify_ogmg_potential)
from .objectives import (FiniteSumObjective, LogisticObjective,
                         QuadraticObjective, RegularizedObjective,
                         finite_difference_check, make_logistic,
                         make_quadratic, power_iteration, regularize)
from .oracles import CountingOracle
from .reference import ReferencePoint, initial_constants, reference_minimum
from .stochastic import (AccSvrgResult, BaselineResult, ScheduleKind,
                         l2s_step_size, run_acc_svrg_g,
                         run_acc_svrg_g_low_accuracy, run_l2s, run_saga,
                         run_svrg, schedule)
from .traces import DetTrace, StochTrace

__all__ = [
    "AccSvrgResult", "BaselineResult", "CountingOracle", "DetTrace",
    "FiniteSumObjective", "LogisticObjective", "Mode", "Outcome",
    "ParseError", "PotentialReplay", "QuadraticObjective", "ReferencePoint",
    "RegularizationState", "RegularizedObjective", "ScheduleKind",
    "SparseDataset", "StochTrace", "ThetaSchedule", "append_bias", "chain",
    "derive_inner_params", "finite_difference_check", "initial_constants",
    "inner_break_iteration", "l2s_step_size", "make_logistic",
    "make_quadratic", "normalize_rows", "parse_libsvm", "power_iteration",
    "prepare", "regularize", "reference_minimum", "run_acc_svrg_g",
    "run_acc_svrg_g_low_accuracy", "run_gd", "run_l2s", "run_m_ogm_g",
    "run_nag", "run_ogm_g", "run_ogm_g_original", "run_r_acc_svrg_g",
    "run_regularized_inner", "run_saga", "run_svrg", "schedule",
    "serialize_libsvm", "solve_alpha", "synth_dataset", "theta_schedule",
    "verify_ogmg_potential",
]
