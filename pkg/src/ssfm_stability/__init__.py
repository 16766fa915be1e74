"""Numerical instability of the split-step Fourier method for the NLS equation."""
from .analysis import (
    InstabilityReport,
    PeakSet,
    PowerSpectrum,
    analyze_trajectory,
    check_shift_symmetry,
    detect_peaks,
    estimate_increment_endpoint,
    estimate_increment_slope,
    noise_floor,
    power_spectrum,
)
from .backgrounds import (
    CwSpec,
    NoiseSpec,
    SolitonSpec,
    add_noise,
    cw_profile,
    multi_soliton_profile,
    soliton_profile,
)
from .propagator import BlowUpError, RunConfig, Trajectory, propagate, split_step
from .spectral import FieldState, Grid, ResonanceInfo, build_grid, forward_ft, inverse_ft, resonance_info
from .theory import (
    TheoryPrediction,
    cw_predict,
    predict_soliton_instability,
    single_node_criterion,
)

__version__ = "0.1.0"
