"""Ghost and heralded polarimetry with polarization-entangled photon pairs.

A chiral sample's optical rotation is measured with unpolarized light by
exploiting the polarization correlations of photon pairs: the rotation
shifts the coincidence fringe between the two arms' polarizers even though
neither single-photon rate carries any fringe.  This package models the
two bench geometries, draws Poissonian counting records, and estimates
fringe phases, rotations, Bell statistics and their shot-noise scaling.
"""

__version__ = "0.1.0"

from .states import (
    ARM_REFERENCE,
    ARM_SAMPLE,
    BASIS_LABELS,
    apply_local,
    bell_phi_plus,
    coincidence_probability,
    correlation_E,
    identity_element,
    partial_trace,
    polarizer,
    purity,
    rotator,
    singles_probability,
    validate_state,
    werner_like,
    wrap_orientation_deg,
    wrap_rotation_deg,
)
from .simulate import (
    ApparatusConfig,
    CHSH_SETTINGS_DEG,
    CountRecord,
    DEFAULT_SWEEP_ANGLES_DEG,
    Geometry,
    Preset,
    PRESET_NAMES,
    Rates,
    SampleSpec,
    SweepResult,
    accidental_rate,
    expected_rates,
    paper_preset,
    simulate_sweep,
    sweep_rates,
    sweep_rng,
)
from .estimate import (
    ChshResult,
    DegenerateCountsError,
    DegenerateFringeError,
    EstimationError,
    FringeFit,
    RotationMeasurement,
    S_QUANTUM_MAX,
    ScalingPoint,
    ScalingResult,
    UnderdeterminedFitError,
    chsh_E,
    chsh_S,
    chsh_from_state,
    extract_rotation,
    fit_fringe,
    infer_visibility,
    measure_rotation,
    phase_spread_rad,
    scaling_study,
)
from .scenario import (
    AnalysisOptions,
    Scenario,
    ScenarioError,
    ScenarioKeyError,
    ScenarioSyntaxError,
    ScenarioValueError,
    SweepCsvError,
    load_scenario,
    parse_scenario,
    read_sweep_csv,
    write_sweep_csv,
)
