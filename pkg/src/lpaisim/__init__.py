"""Deterministic Monte-Carlo simulator for a high-data-rate cold-atom
accelerometer: quantized cycle timing, recapture-limited ensemble dynamics,
per-shot interferometer readout with detection noise, and the estimation
pipeline (fringe calibration, chirped-fringe gravity extraction, Allan
statistics, data-rate sensitivity sweeps).

Every run is reproducible: a (config, seed) pair yields identical results on
the compiled and pure-Python kernels, and run manifests replay byte for byte.
"""

__version__ = "0.1.0"

from .analysis import (
    AllanCurve,
    FringeFit,
    GravityFit,
    SweepResult,
    allan_deviation,
    allan_of_series,
    allan_slope,
    fit_chirped_gravity,
    fit_fringe,
    measured_phase_noise,
    mid_fringe_phases,
    noise_report,
    series_accelerations,
    short_term_sensitivity,
    shot_sensitivity,
    sweep_data_rate,
)
from .cloud import (
    CloudState,
    MotConfig,
    equilibrium_atom_number,
    recapture_fraction,
    restoring_time,
    steady_state_retention,
)
from .config import (
    CycleConfig,
    GravityScanConfig,
    config_from_dict,
    config_to_dict,
    default_config,
    load_config,
    with_data_rate,
)
from .core import (
    CycleOverheads,
    PhysicalParams,
    TimingSequence,
    build_timing,
    quantize_duration,
)
from .detection import DetectionConfig, detected_photons_per_atom, readout_phase_noise
from .engine import (
    ShotSeries,
    settle_ensemble,
    simulate_fringe_scan,
    simulate_gravity_scan,
    simulate_mid_fringe,
)
from .errors import (
    ConfigError,
    DataError,
    DegenerateSignalError,
    DivergenceError,
    FitAmbiguityError,
    FitConvergenceError,
    FitError,
    InfeasibleRateError,
    InsufficientDataError,
    LpaiError,
    RankDeficiencyError,
)
from .fringe import FringeModel, chirped_fringe, mz_phase, transition_probability
from .kernel import IMPLEMENTATION, run_shots
from .noise import DisturbanceInjector, NoiseBudget, total_shot_noise

__all__ = [name for name in dir() if not name.startswith("_")]
