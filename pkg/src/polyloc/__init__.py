"""polyloc: exact quenched measures and localization diagnostics for a lattice
polymer in a heavy-tailed random potential."""

from .fields import (
    FieldRealization,
    GapReport,
    ModifiedFieldStats,
    OrderStats,
    constant_field,
    field_to_csv,
    gap_diagnostics,
    modified_field_stats,
    order_statistics,
    pareto_inverse_cdf,
    sample_pareto_field,
    seed_token,
)
from .lattice import (
    BallIndex,
    CapacityError,
    LatticeSite,
    ball,
    ball_cardinality,
    enumerate_ball,
)
from .oracle import EnumerationResult, compare_dp_vs_oracle, enumerate_paths
from .paths import (
    EventClassifier,
    EventEstimate,
    EventFlags,
    PathSample,
    arrival_slack,
    classify_path,
    estimate_event_probability,
    sample_path,
    sample_path_batch,
    viterbi_path,
)
from .polymer import (
    ComparatorResult,
    EndpointLaw,
    FrontSequence,
    LocalizationMass,
    LogWeightFront,
    WalkKernel,
    comparator_1d,
    endpoint_law,
    endpoint_law_for,
    endpoint_law_to_csv,
    final_front,
    forward_recursion,
    localization_mass,
    make_kernel,
    uniform_kernel,
)
from .experiments import (
    TrialConfig,
    TrialRecord,
    endpoint_distribution_test,
    gap_scaling_study,
    run_one_trial,
    run_trials,
    summarize_localization,
    w_equals_z1_frequency,
)
from .scenario import (
    ScenarioError,
    ScenarioField,
    SwitchNotFoundError,
    SwitchResult,
    build_switch_scenario,
    detect_switch,
    run_switch_study,
)

__version__ = "0.1.0"
