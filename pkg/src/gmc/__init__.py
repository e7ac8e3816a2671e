"""Discrete Gaussian-Minkowski problems in pointed convex cones.

Given a finite measure on directions interior to the polar of a pointed cone
C, find a polyhedral C-pseudo-cone whose Gaussian surface area measure,
scaled by a power of its Gaussian co-volume, reproduces the measure.
"""

from .cone import (
    Cone,
    SphericalGrid,
    build_grid,
    circular_cone,
    cone_gaussian_mass,
    lambda_bound,
    make_cone,
    polar_membership,
    polyhedral_cone,
)
from .errors import GMCError, ValidationError
from .exhaustion import ExhaustionPlan, ExhaustionResult, solve_exhaustive
from .measures import (
    MeasureVector,
    covolume,
    facet_intervals,
    mc_covolume_oracle,
    surface_measure_facet,
    surface_measure_pushforward,
    tail_series,
    tail_terms,
)
from .problem import Problem, load_problem, parse_problem
from .pseudo_cone import (
    DiscreteMeasure,
    WulffShape,
    min_distance,
    radial,
    restrict,
    support_value,
    wulff,
)
from .solver import SolveReport, SolverConfig, eval_objective, gradient, initialization_probe, solve

__all__ = [
    "Cone",
    "DiscreteMeasure",
    "ExhaustionPlan",
    "ExhaustionResult",
    "GMCError",
    "MeasureVector",
    "Problem",
    "SolveReport",
    "SolverConfig",
    "SphericalGrid",
    "ValidationError",
    "WulffShape",
    "build_grid",
    "circular_cone",
    "cone_gaussian_mass",
    "covolume",
    "eval_objective",
    "facet_intervals",
    "gradient",
    "initialization_probe",
    "lambda_bound",
    "load_problem",
    "make_cone",
    "mc_covolume_oracle",
    "min_distance",
    "parse_problem",
    "polar_membership",
    "polyhedral_cone",
    "radial",
    "restrict",
    "solve",
    "solve_exhaustive",
    "support_value",
    "surface_measure_facet",
    "surface_measure_pushforward",
    "tail_series",
    "tail_terms",
    "wulff",
]
