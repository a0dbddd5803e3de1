"""decaylab: a numerical laboratory for energy-decay laws of convex dynamics.

Builds convex objectives realizing prescribed decay curves, simulates
gradient flow / gradient descent / multiplicative-noise SGD / heavy-ball
dynamics on them, and checks every decay bound mechanically.
"""

from ._kernels import NUMBA_ENABLED
from .construct import (ConvexObjective1D, build_no_minimizer_envelope,
                        build_no_minimizer_objective, build_objective,
                        preprocess_monotone_smooth)
from .curves import (DecayCurve, StaircaseSpec, curve_from_document,
                     integral_estimate, make_named_curve, make_staircase,
                     sqrt_deriv_integral, verify_flags)
from .flows import (DivergenceError, Monomial, OscillatorSpec,
                    PreconditionError, Quadratic, Trajectory,
                    classical_oscillator_solution, geometric_schedule,
                    integrate_gradient_flow, integrate_heavy_ball_ode,
                    run_gd, run_heavy_ball_scheme, run_sgd)
from .majorize import (AveragingMap, SequencePair, build_averaging_map,
                       check_tail_dominance, jensen_sqrt_certificate)
from .spectral import (SpectralProfile, build_profile, flatness_sequence,
                       gf_energy, hb_energy)
from .sqrtcompare import (compare_sqrt_integrals, discretize_increments,
                          fuzz_counterexample_search)
from .verify import (DecayReport, best_iterate_bound, decay_products,
                     excess_integral, gd_sum_bound, hb_lyapunov,
                     hb_speed_bound, lyapunov_gf, path_length,
                     self_contracting_check, sgd_bounds)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED", "ConvexObjective1D", "DecayCurve", "StaircaseSpec",
    "DecayReport", "Trajectory", "Quadratic", "Monomial", "OscillatorSpec",
    "SequencePair", "AveragingMap", "SpectralProfile", "DivergenceError",
    "PreconditionError", "build_objective", "build_no_minimizer_envelope",
    "build_no_minimizer_objective", "preprocess_monotone_smooth",
    "make_named_curve", "make_staircase", "curve_from_document",
    "verify_flags", "sqrt_deriv_integral", "integral_estimate",
    "integrate_gradient_flow", "integrate_heavy_ball_ode", "run_gd",
    "run_sgd", "run_heavy_ball_scheme", "classical_oscillator_solution",
    "geometric_schedule", "build_profile", "gf_energy", "hb_energy",
    "flatness_sequence", "build_averaging_map", "check_tail_dominance",
    "jensen_sqrt_certificate", "compare_sqrt_integrals",
    "discretize_increments", "fuzz_counterexample_search", "lyapunov_gf",
    "excess_integral", "decay_products", "best_iterate_bound", "path_length",
    "self_contracting_check", "gd_sum_bound", "sgd_bounds", "hb_lyapunov",
    "hb_speed_bound",
]
