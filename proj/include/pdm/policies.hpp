#pragma once

#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "pdm/core.hpp"

namespace pdm {

enum class ReplacementAction { DoNothing, PreventiveReplace };
enum class OrderAction { NoOrder, Order };

// Replace once P(RUL <= delta_t) reaches p_thres.
struct HeuristicThreshold {
  double p_thres = 0.5;
  void validate() const;
};

// Minimise the single-component renewal cost rate E[C_rep] / E[T_lc].
struct RenewalObjective {};

// Minimise expected replacement cost plus r_bar times the expected life
// discarded by replacing early.
struct OpportunityLossObjective {
  double r_bar = 0.0;
};

// Replacement heuristic plus an order placed once P(RUL <= w + delta_t)
// reaches p_order_thres, where w is the lead time rounded up to the grid.
struct OrderingThresholds {
  double p_order_thres = 0.5;
  double p_rep_thres = 0.5;
  void validate() const;
};

using ReplacementObjective = std::variant<RenewalObjective, OpportunityLossObjective>;
using ReplacementPolicy = std::variant<HeuristicThreshold, RenewalObjective, OpportunityLossObjective>;

enum class RbarOption {
  UpperBoundRenewal = 1,  // optimal age-replacement cost rate without monitoring
  LowerBoundPerfect = 2,  // c_p / mean failure time
  AverageOfBounds = 3,
};

// Population failure-time model: normal(mu, sigma) restricted to positive times.
struct PopulationTtf {
  double mu = 0.0;
  double sigma = 1.0;

  void validate() const;
  double cdf(double t) const;
  double pdf(double t) const;
  // Partial first moment over (0, t].
  double partial_mean(double t) const;
  double mean() const;
};

// Method-of-moments normal fit (unbiased variance) over fleet truths.
PopulationTtf fit_population_ttf(std::span<const UnitTruth> truths);

ReplacementAction heuristic_step(const RulDistribution& dist, double delta_t,
                                 const HeuristicThreshold& params);

double renewal_objective(double t_replace, double t_k, const RulDistribution& dist,
                         const CostModel& costs);

double opportunity_loss_objective(double t_replace, double t_k, const RulDistribution& dist,
                                  const CostModel& costs, double r_bar);

// Age-replacement cost rate of the population for replacement age tau.
double age_replacement_rate(const PopulationTtf& pop, const CostModel& costs, double tau);

double rbar_estimate(const PopulationTtf& pop, const CostModel& costs, RbarOption option);

struct ReplacementOptimum {
  double t_replace = 0.0;
  double value = 0.0;
};

// Minimises the objective over T_R in (t_k, t_k + q], q the 0.9999 RUL quantile:
// best point of a 512-point grid, refined by golden-section search around it.
ReplacementOptimum optimal_replacement_time(double t_k, const RulDistribution& dist,
                                            const CostModel& costs,
                                            const ReplacementObjective& objective);

inline ReplacementAction scheduled_replacement_step(double t_k, double delta_t, double t_replace) {
  return t_k + delta_t >= t_replace ? ReplacementAction::PreventiveReplace
                                    : ReplacementAction::DoNothing;
}

// Lead time adjusted to the decision grid: ceil(L / delta_t) * delta_t.
double lead_window(double lead_time, double delta_t);

struct OrderingState {
  bool ordered = false;
};

std::pair<OrderAction, ReplacementAction> ordering_step(const RulDistribution& dist,
                                                        double delta_t, double lead_time,
                                                        const OrderingState& state,
                                                        const OrderingThresholds& params);

// Replacement-setting outcome for a unit replaced at t_replace, or run to
// failure when t_replace is empty.
LifecycleOutcome replacement_outcome(const UnitTruth& truth, std::optional<double> t_replace,
                                     const CostModel& costs);

// Ordering-setting outcome. An unordered unit is ordered when its life ends.
LifecycleOutcome ordering_outcome(const UnitTruth& truth, std::optional<double> t_replace,
                                  std::optional<double> t_order, const CostModel& costs);

LifecycleOutcome run_replacement_policy(const PredictionTrace& trace, const UnitTruth& truth,
                                        const TimeGrid& grid, const CostModel& costs,
                                        const ReplacementPolicy& policy);

LifecycleOutcome run_ordering_policy(const PredictionTrace& trace, const UnitTruth& truth,
                                     const TimeGrid& grid, const CostModel& costs,
                                     const OrderingThresholds& params);

enum class PerfectMode {
  AlwaysPreventive,
  // Let the unit fail when c_c / T_F beats c_p / T_R,perfect.
  AllowFailure,
};

// Preventive replacement at the last decision time strictly before failure.
LifecycleOutcome perfect_outcome_replacement(const UnitTruth& truth, const TimeGrid& grid,
                                             const CostModel& costs,
                                             PerfectMode mode = PerfectMode::AlwaysPreventive);

// As above with the order placed exactly L ahead of the replacement.
LifecycleOutcome perfect_outcome_ordering(const UnitTruth& truth, const TimeGrid& grid,
                                          const CostModel& costs);

}  // namespace pdm
