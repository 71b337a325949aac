"""resetloop: frequency-domain design and analysis of reset-based add-on
filters for existing linear motion controllers.

Everything works from frequency-response data: describing functions of the
reset element per harmonic, closed-loop pseudo-sensitivity, the backward
corner-frequency design solve, robustness constraints, and a discrete-time
hybrid simulator that serves as the oracle for every prediction.
"""

from .closedloop import (
    AddonDesignResult,
    LoopConfig,
    RobustnessReport,
    SensitivityCurves,
    bode_integral,
    compute_sensitivity_curves,
    design_addon,
    detect_crossover,
    improvement_indicator,
    linear_sensitivity_mag,
    pseudo_sensitivity,
    robustness_check,
    sensitivity_harmonic,
    sensitivity_harmonics_at,
    suggest_omega_res,
    two_resets_check,
)
from .design import (
    CglpDesign,
    PhaseTarget,
    load_design_json,
    make_cglp,
    phase_components,
    reset_corner,
    save_design_json,
    solve_omega_f,
    theta_cglp,
    theta_max,
)
from .errors import (
    BudgetExceededError,
    ConfigError,
    DivergenceError,
    FrfRangeError,
    InfeasiblePhaseError,
    InsufficientDataError,
    NearSingularLoopError,
    NonConvergenceError,
    NonFiniteSignalError,
    NoSolutionError,
    ResetLoopError,
    SingularityError,
    SingularMatrixError,
    ValidationError,
)
from .harmonics import (
    HarmonicResponse,
    cglp_hosidf,
    element_harmonics,
    harmonic_ratio,
    hosidf_intermediates,
    hosidf_reset,
    odd_harmonics,
    open_loop_harmonic,
    open_loop_harmonics,
)
from .lti import (
    DiscreteSos,
    DiscreteTf,
    FrfTable,
    NotchSpec,
    RationalTf,
    eval_tf,
    interp_frf,
    make_inverse_notch,
    make_lead,
    read_frf_csv,
    sample_frf,
    tustin_discretize,
    tustin_sos,
    write_frf_csv,
)
from .reset import (
    DiscreteResetState,
    ResetElement,
    SteadyStateRecord,
    bls_tf,
    clegg,
    discretize_reset,
    gfore,
    identity_element,
    reset_surface_hit,
    simulate_sinusoid_steady,
    step_discrete,
)
from .sim import (
    DisturbanceSpec,
    RunMetrics,
    SimResult,
    StationaryRegion,
    SyntheticPlant,
    Trajectory,
    error_psd,
    make_trajectory,
    settling_metrics,
    simulate_closed_loop,
    simulate_sinusoid_loop,
    synthetic_plant,
    two_mass_plant,
)

__version__ = "0.1.0"
