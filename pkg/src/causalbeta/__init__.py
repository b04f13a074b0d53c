"""Causal reading of market-beta regressions.

The package treats the familiar return-on-index regression as a claim about
a structural model rather than a number: simulate time-indexed linear
Gaussian structural equations, check which three-node graph hypotheses are
even admissible (including the value-weighted aggregator contradiction),
compare closed-form population slopes with estimates, and run a diagnostic
battery on real or synthetic return panels to see which structure the data
resemble.
"""

from .analytics import (
    DEFAULT_SIGMA_X_GRID,
    ChainParams,
    ForkParams,
    ForkSlope,
    attenuation_curve,
    chain_beta,
    fork_beta,
    fork_residual_loading,
)
from .data_io import (
    EnvironmentLabeling,
    EventCalendar,
    LabelScheme,
    PanelMode,
    ReturnPanel,
    ShockControls,
    build_controls,
    build_panel,
    label_environments,
    load_events_csv,
    load_prices_csv,
    load_sector_map_csv,
    load_weights_csv,
)
from .diagnostics import (
    AttenuationRecord,
    BatteryConfig,
    DiagnosticReport,
    EnvironmentBetaResult,
    LeadLagResult,
    LeaveOneOutResult,
    PostHedgeResult,
    environment_betas,
    lead_lag_test,
    leave_one_out_compare,
    post_hedge_residual_loadings,
    run_full_battery,
    shock_day_attenuation,
)
from .errors import (
    CausalBetaError,
    DataError,
    DiagnosticsError,
    RegressionError,
    ValidationError,
)
from .graphs import (
    COLLIDER_WARNING,
    AdmissibilityStatus,
    AdmissibilityVerdict,
    AggregatorSpec,
    BetaReading,
    ChecklistReport,
    DagCase,
    DagClass,
    backdoor_clear,
    check_aggregator_contradiction,
    classify_dag,
    d_separated,
    necessary_conditions_checklist,
)
from .regression import (
    DesignMatrix,
    InteractionResult,
    LagCoefficient,
    RegressionFit,
    SeKind,
    beta_neutral_residual,
    interaction_fit,
    lag_profile,
    ols,
)
from .scm import (
    DagValidation,
    LinearSem,
    NodeRef,
    SamplePanel,
    TimeIndexedDag,
    causal_effect_slope,
    intervene,
    load_sem_json,
    population_covariance,
    population_ols_slope,
    sem_from_dict,
    sem_to_dict,
    simulate,
    simulate_series,
    validate_dag,
)
from .synthetic import (
    SyntheticBundle,
    make_chain_asset_bundle,
    make_chain_market_bundle,
    make_fork_bundle,
    make_two_regime_fork_bundle,
    write_bundle,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SIGMA_X_GRID",
    "ChainParams",
    "ForkParams",
    "ForkSlope",
    "attenuation_curve",
    "chain_beta",
    "fork_beta",
    "fork_residual_loading",
    "EnvironmentLabeling",
    "EventCalendar",
    "LabelScheme",
    "PanelMode",
    "ReturnPanel",
    "ShockControls",
    "build_controls",
    "build_panel",
    "label_environments",
    "load_events_csv",
    "load_prices_csv",
    "load_sector_map_csv",
    "load_weights_csv",
    "AttenuationRecord",
    "BatteryConfig",
    "DiagnosticReport",
    "EnvironmentBetaResult",
    "LeadLagResult",
    "LeaveOneOutResult",
    "PostHedgeResult",
    "environment_betas",
    "lead_lag_test",
    "leave_one_out_compare",
    "post_hedge_residual_loadings",
    "run_full_battery",
    "shock_day_attenuation",
    "CausalBetaError",
    "DataError",
    "DiagnosticsError",
    "RegressionError",
    "ValidationError",
    "COLLIDER_WARNING",
    "AdmissibilityStatus",
    "AdmissibilityVerdict",
    "AggregatorSpec",
    "BetaReading",
    "ChecklistReport",
    "DagCase",
    "DagClass",
    "backdoor_clear",
    "check_aggregator_contradiction",
    "classify_dag",
    "d_separated",
    "necessary_conditions_checklist",
    "DesignMatrix",
    "InteractionResult",
    "LagCoefficient",
    "RegressionFit",
    "SeKind",
    "beta_neutral_residual",
    "interaction_fit",
    "lag_profile",
    "ols",
    "DagValidation",
    "LinearSem",
    "NodeRef",
    "SamplePanel",
    "TimeIndexedDag",
    "causal_effect_slope",
    "intervene",
    "load_sem_json",
    "population_covariance",
    "population_ols_slope",
    "sem_from_dict",
    "sem_to_dict",
    "simulate",
    "simulate_series",
    "validate_dag",
    "SyntheticBundle",
    "make_chain_asset_bundle",
    "make_chain_market_bundle",
    "make_fork_bundle",
    "make_two_regime_fork_bundle",
    "write_bundle",
    "__version__",
]
