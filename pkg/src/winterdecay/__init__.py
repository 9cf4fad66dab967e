"""Decay of a quantum particle through a delta-shell barrier (the Winter model).

The decay law P(t) is computed from the resonance expansion of the propagator,
with tools for its large-coupling asymptotics and the quadratic Gauss sums
that govern where it is irregular.
"""

__version__ = "0.1.0"

from .resonance import (CollisionError, ConvergenceError, ModelParams, PoleError, Resonance,
                        ResonanceError, ResonanceSet, find_resonances, initial_guess,
                        krein_lambda, pole_residual)
from .specfun import FaddeevaOverflowError, erfc_scaled, faddeeva, gamma_real
from .states import (InitialState, ResonantState, SpectralData, build_spectral, build_state,
                     coeff_C, eval_state, overlap_I, q_squared, residue_sum_check)
from .propagator import (DecayCurve, Snapshot, decay_curve, decay_derivative, decay_law,
                         direct_propagate, smeared_log_derivative, snapshot, spectral_kernel,
                         time_kernel, wavefunction)
from .asymptotics import (GaussSumResult, asymptotic_boundary, asymptotic_derivative,
                          classify_growth, derivative_limit, derivative_limit_check, gauss_sum,
                          tail_sum, tail_sum_closed)
