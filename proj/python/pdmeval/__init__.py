"""Decision-oriented evaluation of RUL prognostics for predictive maintenance."""

from ._core import (  # noqa: F401
    ConfigError,
    CostModel,
    CdfPoints,
    DegenerateFitError,
    DomainError,
    Error,
    FleetEvaluation,
    HeuristicThreshold,
    InfeasiblePerfectError,
    InputError,
    Interval,
    LifecycleOutcome,
    Lognormal,
    NumericalError,
    OpportunityLossObjective,
    OrderingOptimum,
    OrderingThresholds,
    PerfectMode,
    PointMass,
    PopulationTtf,
    PredictionTrace,
    RbarOption,
    RenewalObjective,
    ReplacementKind,
    ReplacementOptimum,
    SimulatorConfig,
    ThresholdGrid,
    ThresholdOptimum,
    TimeGrid,
    TraceEntry,
    UnitTruth,
    WeightedSamples,
    evaluate_fleet,
    expected_exceedance,
    exponential_correlation_matrix,
    fit_lognormal_from_two_cdf_points,
    fit_population_ttf,
    lead_window,
    mean,
    metric,
    optimal_replacement_time,
    opportunity_loss_objective,
    optimize_heuristic_threshold,
    optimize_ordering_thresholds,
    perfect_outcome_ordering,
    perfect_outcome_replacement,
    point_mass_traces,
    prob_rul_leq,
    quantile,
    rbar_estimate,
    read_traces,
    read_truths,
    renewal_objective,
    renewal_ratio,
    renewal_ratio_variance,
    run_ordering_policy,
    run_replacement_policy,
    sample_fleet,
    truncated_mean_below,
    write_traces,
    write_truths,
)
