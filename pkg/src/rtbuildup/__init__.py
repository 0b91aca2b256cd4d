"""Transient buildup dynamics in 1D double-barrier resonant tunneling structures."""

from .analysis import (
    BuildupSeries,
    FitWindowError,
    NodePositionError,
    NoOnsetError,
    OnsetReport,
    delta_curve,
    detect_onset,
    exponential_law,
    fit_envelope_exponent,
    fit_time_constant,
    local_slopes,
    normalize_buildup,
)
from .dynamics import (
    BuildupDecomposition,
    ConvergenceWarning,
    TransientSolution,
    buildup_decomposition,
    evolve_full,
    evolve_single_resonance,
)
from .moshinsky import (
    MoshinskyArgument,
    MoshinskyOverflowError,
    ScaledComplex,
    faddeeva,
    faddeeva_scaled,
    moshinsky_asymptotic,
    moshinsky_m,
    moshinsky_m_scaled,
    moshinsky_reflect,
)
from .profile import PotentialProfile, ProfileError, build_profile, potential_at
from .resonances import (
    GamowResidualError,
    PoleConvergenceError,
    ResonantState,
    WindingMismatchError,
    find_poles,
    gamow_state,
    one_term_phi,
    pole_function,
    refine_pole,
    winding_number,
)
from .scattering import (
    PeakSeed,
    ScanResult,
    StationaryState,
    TransferMatrix,
    ZeroWavevectorError,
    stationary_state,
    stationary_wave,
    transfer_matrix,
    transmission_scan,
)
from .units import HBAR_EV_FS, HBAR2_OVER_2ME_EV_A2, PhysicalConstants

__version__ = "0.1.0"

__all__ = [
    "HBAR_EV_FS",
    "HBAR2_OVER_2ME_EV_A2",
    "PhysicalConstants",
    "PotentialProfile",
    "ProfileError",
    "build_profile",
    "potential_at",
    "TransferMatrix",
    "StationaryState",
    "ScanResult",
    "PeakSeed",
    "ZeroWavevectorError",
    "transfer_matrix",
    "stationary_state",
    "stationary_wave",
    "transmission_scan",
    "ResonantState",
    "PoleConvergenceError",
    "WindingMismatchError",
    "GamowResidualError",
    "find_poles",
    "gamow_state",
    "one_term_phi",
    "pole_function",
    "refine_pole",
    "winding_number",
    "MoshinskyArgument",
    "MoshinskyOverflowError",
    "ScaledComplex",
    "faddeeva",
    "faddeeva_scaled",
    "moshinsky_m",
    "moshinsky_m_scaled",
    "moshinsky_reflect",
    "moshinsky_asymptotic",
    "TransientSolution",
    "BuildupDecomposition",
    "ConvergenceWarning",
    "evolve_single_resonance",
    "evolve_full",
    "buildup_decomposition",
    "BuildupSeries",
    "OnsetReport",
    "NodePositionError",
    "FitWindowError",
    "NoOnsetError",
    "exponential_law",
    "normalize_buildup",
    "fit_time_constant",
    "delta_curve",
    "detect_onset",
    "fit_envelope_exponent",
    "local_slopes",
]
