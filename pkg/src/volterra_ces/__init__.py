"""Linear equations with memory and the Cesàro limits of their solutions.

The package computes resolvents of integrodifferential, delay and integral
convolution equations, solves the perturbed equations by direct stepping and
by variation of constants, and checks when running means of the solutions
converge.
"""
from .numerics import GridFunction, convolve, integrate, running_mean
from .measures import (FiniteSignedMeasure, convolve_measure, reflect_to_halfline,
                       total_mass, total_variation)
from .resolvents import (ResolventBundle, check_resolvent_integrals, differential_resolvent,
                         fde_resolvent, integral_resolvent)
from .solvers import (Scenario, solve, solve_fde, solve_ide_direct, solve_ide_voc,
                      solve_integral_eq)
from .cesaro import (CesaroReport, Decomposition, check_additivity, convolution_limit_check,
                     decompose, estimate_limit, interval_average_map,
                     positive_equivalence_check, verify_theorem)
from .spectral import (RootSet, char_eval, decay_rate_check, integrability_verdict,
                       locate_roots, resonant_forcing)
from .forcing import pathological_f, reference_f
from .meansquare import mean_square_additive

__all__ = [
    "GridFunction",
    "convolve",
    "integrate",
    "running_mean",
    "FiniteSignedMeasure",
    "convolve_measure",
    "reflect_to_halfline",
    "total_mass",
    "total_variation",
    "ResolventBundle",
    "check_resolvent_integrals",
    "differential_resolvent",
    "fde_resolvent",
    "integral_resolvent",
    "Scenario",
    "solve",
    "solve_fde",
    "solve_ide_direct",
    "solve_ide_voc",
    "solve_integral_eq",
    "CesaroReport",
    "Decomposition",
    "check_additivity",
    "convolution_limit_check",
    "decompose",
    "estimate_limit",
    "interval_average_map",
    "positive_equivalence_check",
    "verify_theorem",
    "RootSet",
    "char_eval",
    "decay_rate_check",
    "integrability_verdict",
    "locate_roots",
    "resonant_forcing",
    "pathological_f",
    "reference_f",
    "mean_square_additive",
]

__version__ = "0.1.0"
