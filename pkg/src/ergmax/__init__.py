"""Numerical toolkit for ergodic maximization on expanding circle maps.

The package computes maximizing periodic orbits of an observable, solves
for calibrated sub-actions with the one-sided transfer recursion, shadows
pseudo-orbits by true orbits (exactly rational on linear maps), builds
smooth perturbations that lock the maximum onto a chosen orbit, and runs
entropy and approximation diagnostics on empirical data.
"""

from .circle import circle_dist, dist_to_set, min_pairwise_dist, wrap01
from .dynamics import (ExpandingMap, PeriodicOrbit, evaluate, evaluate_array,
                       forward_orbit, inverse_branches,
                       inverse_branches_array, orbit_count_by_necklace,
                       parse_map_spec, periodic_points, prime_orbits)
from .entropy import (ApproximationSchedule, EntropyEstimate, MarkovPartition,
                      ReturnStatistics, dynamical_ball, partition_entropy,
                      periodic_approximation, return_times,
                      shannon_bound_check, zero_entropy_perturbation)
from .errors import (DeltaTooLarge, DomainError, ErgmaxError,
                     InsufficientSamples, NoConvergence, NonExpanding,
                     NotSmooth, ParseError, PeriodTooLarge,
                     PerturbationTooLarge, TargetUnreachable, UnsupportedMap)
from .lax import (EffectiveObservable, GridFunction, SubActionResult,
                  VerifyReport, apply_lax, effective_observable,
                  read_grid_csv, solve_subaction, verify_subaction,
                  write_grid_csv)
from .locking import (FarPointReport, LockingConstants, LockingPerturbation,
                      SeparationReport, SmoothBump, compute_constants,
                      far_point_check, locking_perturbation,
                      preimage_separation, smooth_distance, verify_locking)
from .maxsearch import (MaximizationResult, SweepRow, maximize_over_orbits,
                        orbit_average, rotation_number, theta_sweep)
from .observables import (FunctionObservable, Observable, parse_observable,
                          smoothness_report, to_text)
from .shadowing import (PreOrbit, PseudoOrbit, ShadowResult,
                        calibrating_preorbit, mine_recurrences,
                        read_pseudo_orbit_csv, shadow, validate_pseudo_orbit,
                        write_pseudo_orbit_csv)

__version__ = "0.1.0"

__all__ = [
    "ApproximationSchedule", "DeltaTooLarge", "DomainError",
    "EffectiveObservable", "EntropyEstimate", "ErgmaxError", "ExpandingMap",
    "FarPointReport", "FunctionObservable", "GridFunction",
    "InsufficientSamples", "LockingConstants", "LockingPerturbation",
    "MarkovPartition", "MaximizationResult", "NoConvergence", "NonExpanding",
    "NotSmooth", "Observable", "ParseError", "PeriodTooLarge",
    "PeriodicOrbit", "PerturbationTooLarge", "PreOrbit", "PseudoOrbit",
    "ReturnStatistics", "SeparationReport", "ShadowResult", "SmoothBump",
    "SubActionResult", "SweepRow", "TargetUnreachable", "UnsupportedMap",
    "VerifyReport", "apply_lax", "calibrating_preorbit", "circle_dist",
    "compute_constants", "dist_to_set", "dynamical_ball",
    "effective_observable", "evaluate", "evaluate_array", "far_point_check",
    "forward_orbit", "inverse_branches", "inverse_branches_array",
    "locking_perturbation", "maximize_over_orbits", "min_pairwise_dist",
    "mine_recurrences", "orbit_average", "orbit_count_by_necklace",
    "parse_map_spec", "parse_observable", "partition_entropy",
    "periodic_approximation", "periodic_points", "preimage_separation",
    "prime_orbits", "read_grid_csv", "read_pseudo_orbit_csv",
    "return_times", "rotation_number", "shadow", "shannon_bound_check",
    "smooth_distance", "smoothness_report", "solve_subaction", "theta_sweep",
    "to_text", "validate_pseudo_orbit", "verify_locking", "verify_subaction",
    "wrap01", "write_grid_csv", "write_pseudo_orbit_csv",
    "zero_entropy_perturbation",
]
