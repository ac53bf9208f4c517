from importlib.metadata import PackageNotFoundError, version  # pragma: no cover

try:
    # Change here if project is renamed and does not equal the package name
    dist_name = "optobell"
    __version__ = version(dist_name)
except PackageNotFoundError:  # pragma: no cover
    __version__ = "unknown"
finally:
    del version, PackageNotFoundError

from .errors import (
    OptobellError,
    ParameterError,
    InstabilityError,
    EmptyIntervalError,
    ConfigError,
    ConvergenceError,
    SingularSystemError,
    NoSignalError,
)
from .model import (
    SystemParams,
    InputState,
    RawDriveSpec,
    StabilityReport,
    symmetric_params,
    linearize_drives,
    check_stability,
    bose_occupancy,
    mechanical_occupancy,
    thermal_ratio,
)
from .dynamics import (
    ScatteringMatrix,
    CoefficientSet,
    drift_matrix,
    solve_full_scattering,
    bogolyubov,
    rwa_coefficients,
    rwa_large_cooperativity,
    commutator_residual,
    coefficients_from_scattering,
    scattering_from_coefficients,
    output_scattering,
    counter_rotating_weight,
)
from .moments import (
    CorrelatorSet,
    OutputGaussianState,
    Erratum,
    propagate_moments,
    ordered_moment,
    wick_fourth_moment,
    correlators,
    closed_form_correlators,
    closed_form_errata,
)
from .bell import (
    DetectionConfig,
    BellMetrics,
    detection_state,
    detector_intensities,
    intensity_correlations,
    correlation_coefficient,
    closed_form_correlation,
    bell_cd,
    chsh_s_max,
    bell_metrics,
    optimal_barred_angles,
    raw_angles,
    verify_chsh_from_angles,
    evaluate_point,
)
from .sensitivity import (
    SensitivityCoefficients,
    sensitivity_coefficients,
    linearized_f,
    finite_difference_sensitivity,
    compare_slopes,
    alpha_boundary,
    alpha_boundary_root,
    threshold_r,
    tolerable_noise,
    noise_budget,
    optimal_r,
)
from .config import (
    DEFAULTS,
    Scenario,
    parse_config,
    load_config,
    parse_assignments,
    resolve,
    format_config,
    build_scenario,
)
from .sweep import (
    Axis,
    SweepSpec,
    SweepResult,
    ContourResult,
    run_sweep,
    extract_contour,
    region_area,
    upper_boundary,
    compare_rwa,
    noise_curves,
)
from .emit import emit, write_csv, write_json, write_svg
from .presets import PRESETS, Preset, get_preset, run_preset
