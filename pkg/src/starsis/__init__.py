"""Discrete-time SIS epidemics on star and multilevel-star graphs."""
from .model_core import (
    GraphTopology,
    Params,
    build_multilevel_star,
    build_star,
    iterate_full,
    step_full,
)
from .reduced_map import (
    FixedPointReport,
    Regime,
    StarParams,
    State2,
    apply_F,
    classify_regime,
    phi1,
    phi2_of_x,
    phi2_of_y,
    solve_fixed_points,
    threshold,
)
from .dynamics import Region, classify_region, convergence_time, flip_classifier, iterate
from .spectral import eig2, jacobian, mvt_matrix, subcritical_contraction_check
from .multilevel import LevelParams, apply_F_multilevel, solve_fixed_point_multilevel
from .scalar import f_scalar, iterate_scalar, scalar_report

__version__ = "0.1.0"

__all__ = [
    "GraphTopology",
    "Params",
    "build_multilevel_star",
    "build_star",
    "iterate_full",
    "step_full",
    "FixedPointReport",
    "Regime",
    "StarParams",
    "State2",
    "apply_F",
    "classify_regime",
    "phi1",
    "phi2_of_x",
    "phi2_of_y",
    "solve_fixed_points",
    "threshold",
    "Region",
    "classify_region",
    "convergence_time",
    "flip_classifier",
    "iterate",
    "eig2",
    "jacobian",
    "mvt_matrix",
    "subcritical_contraction_check",
    "LevelParams",
    "apply_F_multilevel",
    "solve_fixed_point_multilevel",
    "f_scalar",
    "iterate_scalar",
    "scalar_report",
]
