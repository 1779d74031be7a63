"""First-order high-frequency Floquet solution of the driven spin-boson model.

Library layout:

- specfun: Bessel functions and the periodic kick coefficients (two routes)
- model: drive/bath/temperature types, spectral integrals, discretization
- floquet_core: rotating frame, harmonics, projectors, displacement algebra
- reduced_dynamics: closed-form reduced qubit state and observables
- stroboscopic: static-Hamiltonian simulation protocol and polaron probes
- oracle: truncated-Fock brute force used to validate everything above
- cli: figure-data regeneration and generic runs (CSV output)
"""

from .model import (
    CallableSpectralDensity,
    DiscreteBath,
    DriveConfig,
    OhmicSpectralDensity,
    SpectralIntegrals,
    ThermalParams,
    discretize,
    ohmic_j,
    spectral_integrals,
    spectral_integrals_grid,
)
from .specfun import (
    KickCoefficients,
    bessel_j,
    eta,
    kick_coefficients,
    kick_f_series,
    kick_fh_integral,
    kick_h_series,
)

__version__ = "0.1.0"

__all__ = [
    "CallableSpectralDensity",
    "DiscreteBath",
    "DriveConfig",
    "OhmicSpectralDensity",
    "SpectralIntegrals",
    "ThermalParams",
    "discretize",
    "ohmic_j",
    "spectral_integrals",
    "spectral_integrals_grid",
    "KickCoefficients",
    "bessel_j",
    "eta",
    "kick_coefficients",
    "kick_f_series",
    "kick_fh_integral",
    "kick_h_series",
    "__version__",
]
