"""Pulsed optomechanical geometric-phase simulator.

Composes four radiation-pressure pulses into effective mechanical
nonlinearities, tracks Gaussian and non-Gaussian mechanical states, and maps
the observable squeezing of SiN string resonators.
"""

from geophase.phase_space import (
    GaussianState,
    SymplecticMap,
    apply_symplectic,
    gaussian_wigner,
    make_thermal,
    make_vacuum,
    min_variance_and_angle,
    shear_from_chi2,
    variance_along,
)
from geophase.pulses import (
    ClosureResidual,
    Pulse,
    PulseLoop,
    apply_loss,
    canonical_loop,
    chi_from_pulse,
    compose_loop,
    corrected_displacements,
    pulse_symplectic,
    squeezing_with_nonclosure,
    validate_timing,
)

__version__ = "0.1.0"
