# Copyright 2026 The scenario-hull Authors
# SPDX-License-Identifier: Apache-2.0
"""Certified scenario hulls for chance-constrained programs."""

from ._core import (
    AdmissibleSet,
    ConfigError,
    ConstraintSpec,
    HullSet,
    InfeasibleError,
    NumericalError,
    ProblemInstance,
    UncertaintySpace,
    admissible_mpc_sample_size,
    binomial_tail,
    build_hull,
    clopper_pearson,
    counterexample_optimum,
    default_directions,
    estimate_point_violation,
    hull_bound,
    hull_membership,
    hull_sample_size,
    mpc_sample_size,
    optimize_over_hull,
    run_command,
    run_feasibility_trials,
    sample_size_single,
    verify_support_constraints,
)

__all__ = [
    "AdmissibleSet",
    "ConfigError",
    "ConstraintSpec",
    "HullSet",
    "InfeasibleError",
    "NumericalError",
    "ProblemInstance",
    "UncertaintySpace",
    "admissible_mpc_sample_size",
    "binomial_tail",
    "build_hull",
    "clopper_pearson",
    "counterexample_optimum",
    "default_directions",
    "estimate_point_violation",
    "hull_bound",
    "hull_membership",
    "hull_sample_size",
    "mpc_sample_size",
    "optimize_over_hull",
    "run_command",
    "run_feasibility_trials",
    "sample_size_single",
    "verify_support_constraints",
]
