#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pdm/core.hpp"
#include "pdm/policies.hpp"

namespace pdm {

// Renewal-reward estimate mean(C_m) / mean(T_lc).
double renewal_ratio(std::span<const LifecycleOutcome> outcomes);

struct RatioVariance {
  double value = 0.0;
  bool clamped = false;  // the delta-method expression came out negative
};

// First-order (delta-method) variance of the renewal ratio, n - 1 sample moments.
RatioVariance renewal_ratio_variance(std::span<const LifecycleOutcome> outcomes);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct FleetEvaluation {
  double r_hat = 0.0;
  std::optional<double> var_r_hat;
  double r_perfect = 0.0;
  std::optional<double> var_r_perfect;  // reported, not propagated into var_m_hat
  double m_hat = 0.0;
  std::optional<double> var_m_hat;
  std::optional<Interval> ci95_m;
  bool variance_clamped = false;
  std::size_t n_units = 0;
  std::vector<LifecycleOutcome> outcomes;
  std::vector<LifecycleOutcome> perfect_outcomes;
  std::vector<std::string> excluded_units;  // infeasible perfect baseline
};

// Relative excess of the policy cost rate over the perfect-prognostics rate.
// Both outcome sets must cover the same units.
FleetEvaluation metric(std::vector<LifecycleOutcome> outcomes,
                       std::vector<LifecycleOutcome> perfect_outcomes);

// M-hat alone, without the bookkeeping of metric().
double metric_value(std::span<const LifecycleOutcome> outcomes,
                    std::span<const LifecycleOutcome> perfect_outcomes);

// Paired nonparametric bootstrap percentile interval for M-hat.
Interval bootstrap_ci_m(std::span<const LifecycleOutcome> outcomes,
                        std::span<const LifecycleOutcome> perfect_outcomes, int resamples,
                        std::uint64_t seed, double level = 0.95);

// Bootstrap variance of the renewal ratio.
double bootstrap_variance_r(std::span<const LifecycleOutcome> outcomes, int resamples,
                            std::uint64_t seed);

using DecisionPolicy =
    std::variant<HeuristicThreshold, RenewalObjective, OpportunityLossObjective, OrderingThresholds>;

enum class Setting { Replacement, Ordering };

inline Setting setting_of(const DecisionPolicy& p) {
  return std::holds_alternative<OrderingThresholds>(p) ? Setting::Ordering : Setting::Replacement;
}

// Traces paired with truths in truth order; missing traces are input errors.
std::vector<const PredictionTrace*> match_traces(std::span<const PredictionTrace> traces,
                                                 std::span<const UnitTruth> truths);

struct PerfectBaseline {
  std::vector<UnitTruth> truths;  // feasible units only
  std::vector<LifecycleOutcome> outcomes;
  std::vector<std::string> excluded_units;
};

PerfectBaseline perfect_baseline(std::span<const UnitTruth> truths, const TimeGrid& grid,
                                 const CostModel& costs, Setting setting,
                                 PerfectMode mode = PerfectMode::AlwaysPreventive);

// Runs the policy on every unit and compares against the perfect baseline.
// Units without a feasible perfect baseline are excluded on both sides.
FleetEvaluation evaluate_fleet(std::span<const PredictionTrace> traces,
                               std::span<const UnitTruth> truths, const TimeGrid& grid,
                               const CostModel& costs, const DecisionPolicy& policy,
                               PerfectMode mode = PerfectMode::AlwaysPreventive);

}  // namespace pdm
