"""Dyadic two-weight inequalities on finite trees: operators, Littlewood–Paley
norms, testing conditions and operator-norm estimators."""

from .conditions import (
    ConditionReport,
    Infeasible,
    carleson_norm,
    cf_alpha,
    collection_value,
    disjoint_value,
    dlbo_ratio,
    equivalent_expressions,
    fw_characteristic,
    integral_condition,
    lambda_avg,
    lambda_gamma,
    mass_ratio,
    maximal_condition_values,
    multiplier_constant_estimate,
    multiplier_test,
    sparse_extract,
    wolff_condition,
    wolff_potential,
)
from .errors import InstanceTooLargeError, ParameterError, TwoWeightError, ValidationError
from .estimate import (
    NormEstimate,
    estimate_norm_maximal,
    estimate_norm_summation,
    grid_oracle,
    maximal_pair_norms,
    rayleigh_ratio,
    search_extremal,
)
from .lp import conjugate, lp_dual_norm, lp_dual_subone, lp_factorize, lp_norm, lp_pairing
from .operators import apply_maximal, apply_summation, hl_maximal, lebesgue_norm, riesz_coefficients
from .optimize import OptimizerOptions
from .tree import (
    DisjointFamily,
    DyadicTree,
    Instance,
    Measure,
    build_tree,
    check_collection,
    cube_average,
    cube_mass,
    indicator,
)

__version__ = "0.1.0"
