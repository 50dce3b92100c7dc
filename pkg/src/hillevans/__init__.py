"""Spectral stability of periodic travelling waves via Hill's equation.

The wave ``U(x - c t)`` of ``u_tt - u_xx + V'(u) = 0`` is computed from its
energy first integral; the Floquet spectrum of its linearisation is located
with an Evans function built from the monodromy of an associated Hill
equation, and Krein signatures of real characteristic values are tracked as
the Floquet exponent varies.
"""

from .errors import (
    EmptyWindow,
    HillEvansError,
    IntegrationFailure,
    NoOrbit,
    NonSimple,
    NotACharacteristicValue,
    RotationalUnavailable,
    SeparatrixDivergence,
    TrackingAmbiguity,
    ZeroCharacteristicValue,
)
from .evans import (
    EvansContext,
    KreinResult,
    evans_d1,
    evans_d2,
    evans_d3,
    evans_hill,
    krein_signature,
    mu_prime,
    wrap_angle,
)
from .hill import (
    MonodromyMatrix,
    floquet_multipliers,
    integrate_hill,
    integrate_hill_variational,
    integrate_linearised,
)
from .spectrum import (
    EventKind,
    RealRoot,
    SpectralPoint,
    SweepEvent,
    SweepResult,
    real_characteristic_values,
    spectrum_scan,
    sweep_theta,
    theta_of_zeta,
)
from .waves import (
    Branch,
    Potential,
    Regime,
    WaveParameters,
    WaveProfile,
    classify_regime,
    compute_period,
    phase_portrait,
    phi4,
    potential_from_expressions,
    sine_gordon,
    turning_points,
    wave_profile,
)

__version__ = "0.1.0"

__all__ = [
    "EmptyWindow",
    "HillEvansError",
    "IntegrationFailure",
    "NoOrbit",
    "NonSimple",
    "NotACharacteristicValue",
    "RotationalUnavailable",
    "SeparatrixDivergence",
    "TrackingAmbiguity",
    "ZeroCharacteristicValue",
    "EvansContext",
    "KreinResult",
    "evans_d1",
    "evans_d2",
    "evans_d3",
    "evans_hill",
    "krein_signature",
    "mu_prime",
    "wrap_angle",
    "MonodromyMatrix",
    "floquet_multipliers",
    "integrate_hill",
    "integrate_hill_variational",
    "integrate_linearised",
    "EventKind",
    "RealRoot",
    "SpectralPoint",
    "SweepEvent",
    "SweepResult",
    "real_characteristic_values",
    "spectrum_scan",
    "sweep_theta",
    "theta_of_zeta",
    "Branch",
    "Potential",
    "Regime",
    "WaveParameters",
    "WaveProfile",
    "classify_regime",
    "compute_period",
    "phase_portrait",
    "phi4",
    "potential_from_expressions",
    "sine_gordon",
    "turning_points",
    "wave_profile",
]
