"""Blind process tomography laboratory for a two-qubit exchange coupling.

Simulates spin-component measurements on randomly prepared qubit pairs evolved
by a cylindrical-symmetry Heisenberg coupling, estimates the process from
outcome statistics alone (down to a single preparation per state), reconstructs
the propagator through a three-interval protocol that removes the integer-shift
indeterminacy, and reproduces error-vs-budget experiments.
"""

from .estimators import (
    EstimationError,
    OxStatistics,
    OzStatistics,
    ParamEstimates,
    estimate_cross_moment,
    estimate_v_sign,
    estimate_v_squared,
    exact_ox_expectations,
    exact_oz_expectations,
    expected_r14_i14,
    moment_r2_pair,
    multiple_preparation_v_squared,
    recover_r_pair,
    single_preparation_estimates,
    solve_w,
)
from .harness import (
    ConfigError,
    ExperimentConfig,
    TestResult,
    run_elementary_test,
    run_sweep,
    truth_for,
    write_full_json,
    write_sweep_csvs,
)
from .measurement import (
    ClosedFormOx,
    FrequencyAccumulator,
    closed_form_ox,
    closed_form_oz,
    ox_probabilities,
    oz_probabilities,
    sample_outcome,
    sample_outcomes,
)
from .physics import (
    FrequencyQuad,
    MixingParams,
    PhysicalConstants,
    ProcessParams,
    angular_frequencies,
    apply_process,
    build_evolution_matrix,
    evolution_matrix_from_scaled,
    mixing_parameters,
)
from .reconstruction import (
    ProtocolTimes,
    ReconstructionResult,
    extended_protocol,
    invert_v,
    invert_w,
    nrmse,
    relative_error,
    single_interval,
    single_interval_phase,
)
from .states import (
    PRESETS,
    MomentSet,
    PrepDistribution,
    PreparedPair,
    QubitParams,
    analytic_moments,
    product_state,
    product_states,
    sample_ensemble,
    sample_pair,
)

__version__ = "0.1.0"
