"""Behavioral simulator and analysis toolkit for time-based
resistance-to-digital converters."""

from .calibration import (
    CalibrationSet,
    DriftModel,
    FittedInverse,
    fit_offline,
    invert,
    online_update,
    rms_error_experiment,
)
from .counter import CounterConfig, gated_count, max_clock, width_check
from .dse import DesignGrid, argmin_cost, cost, grid_from_csv, grid_from_model
from .errors import (
    CalibrationError,
    ConfigError,
    CounterOverflowError,
    RangeError,
    RdcsimError,
    ValidationError,
)
from .metrics import (
    FomReport,
    avg_power,
    dynamic_range_db,
    energy_per_readout,
    fom_energy_per_cs,
    table_report,
)
from .noise import (
    JitterModel,
    PhaseNoiseSpec,
    accumulated_jitter,
    accumulated_jitter_curve,
    design_phase_noise,
    fitted_widlar_params,
    integrated_jitter,
    jitter_slope,
    phase_noise_db,
    sample_timing_error,
    timing_error_path,
)
from .oscillator import (
    StageDelays,
    TransferCurve,
    characteristic_voltage,
    dro_frequency,
    oscillation_frequency,
    stage_delay,
    transfer_curve,
    widlar_current,
)
from .profiles import (
    DeviceProfile,
    PhysicalConstants,
    WidlarParams,
    builtin_profile,
    builtin_profiles,
    load_profile,
    load_profile_file,
    resolve_profile,
    serialize_profile,
)
from .resolution import (
    ReadoutTrace,
    ResolutionCurve,
    analytic_bits,
    analytic_bits_asymptote,
    max_bits_from_count,
    monte_carlo,
    resolution_curve,
    sqej,
    supply_noise_sweep,
    transient_jitter_model,
    vt_sensitivity_sweep,
)

__version__ = "0.1.0"
