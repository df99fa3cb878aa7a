#include "pdm/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace pdm {
namespace {

// Per-unit decision-relevant probabilities at each visited decision time.
struct UnitProbabilities {
  std::vector<double> times;
  std::vector<double> p_replace;  // P(RUL <= delta_t)
  std::vector<double> p_order;    // P(RUL <= w + delta_t), ordering setting only
};

UnitProbabilities unit_probabilities(const PredictionTrace& trace, const UnitTruth& truth,
                                     const TimeGrid& grid, const CostModel& costs, bool ordering) {
  UnitProbabilities up;
  const int last = grid.last_step_before(truth.failure_time);
  const OrderingThresholds probe{0.5, 0.5};
  for (int k = 1; k <= last; ++k) {
    const double t = grid.time(k);
    const TraceEntry* e = trace.find(t, grid.tolerance());
    if (e == nullptr)
      throw InputError("unit " + trace.unit_id + ": no prediction at decision time " + std::to_string(t));
    up.times.push_back(t);
    up.p_replace.push_back(prob_rul_leq(e->dist, grid.delta_t));
    if (ordering) {
      // ordering_step performs the cdf-point availability check.
      (void)ordering_step(e->dist, grid.delta_t, costs.lead_time, OrderingState{}, probe);
      up.p_order.push_back(prob_rul_leq(e->dist, lead_window(costs.lead_time, grid.delta_t) + grid.delta_t));
    }
  }
  return up;
}

std::optional<double> first_crossing(const std::vector<double>& times,
                                     const std::vector<double>& probs, double threshold) {
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] >= threshold) return times[i];
  return std::nullopt;
}

struct PreparedFleet {
  PerfectBaseline base;
  std::vector<UnitProbabilities> probs;
};

PreparedFleet prepare(std::span<const PredictionTrace> traces, std::span<const UnitTruth> truths,
                      const TimeGrid& grid, const CostModel& costs, Setting setting,
                      PerfectMode mode) {
  costs.validate();
  PreparedFleet f{perfect_baseline(truths, grid, costs, setting, mode), {}};
  if (f.base.truths.size() < 2) throw InputError("threshold optimization needs at least two units");
  const auto matched = match_traces(traces, f.base.truths);
  for (std::size_t i = 0; i < matched.size(); ++i)
    f.probs.push_back(unit_probabilities(*matched[i], f.base.truths[i], grid, costs,
                                         setting == Setting::Ordering));
  return f;
}

}  // namespace

void ThresholdGrid::validate() const {
  if (values.empty()) throw ConfigError("threshold grid is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0.0 && values[i] < 1.0)) throw ConfigError("thresholds must lie in (0, 1)");
    if (i > 0 && !(values[i] > values[i - 1])) throw ConfigError("thresholds must be strictly increasing");
  }
}

ThresholdGrid ThresholdGrid::uniform(double start, double stop, double step) {
  if (!(step > 0.0)) throw ConfigError("threshold step must be > 0");
  if (!(stop >= start)) throw ConfigError("threshold stop must be >= start");
  ThresholdGrid g;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long i = 0; i <= n; ++i) {
    // Rounded to 12 decimals so 0.01 * 33 lands on 0.33.
    g.values.push_back(std::round((start + step * static_cast<double>(i)) * 1e12) / 1e12);
  }
  g.validate();
  return g;
}

ThresholdGrid ThresholdGrid::standard() { return uniform(0.01, 0.99, 0.01); }

ThresholdGrid ThresholdGrid::with(std::span<const double> extra) const {
  ThresholdGrid g{values};
  g.values.insert(g.values.end(), extra.begin(), extra.end());
  std::sort(g.values.begin(), g.values.end());
  g.values.erase(std::unique(g.values.begin(), g.values.end()), g.values.end());
  g.validate();
  return g;
}

ThresholdOptimum optimize_heuristic_threshold(std::span<const PredictionTrace> traces,
                                              std::span<const UnitTruth> truths,
                                              const TimeGrid& grid, const CostModel& costs,
                                              const ThresholdGrid& thresholds, PerfectMode mode) {
  thresholds.validate();
  const PreparedFleet f = prepare(traces, truths, grid, costs, Setting::Replacement, mode);

  ThresholdOptimum best;
  best.m_hat = std::numeric_limits<double>::infinity();
  std::vector<LifecycleOutcome> outcomes(f.base.truths.size());
  for (double p : thresholds.values) {
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
      const auto t_rep = first_crossing(f.probs[i].times, f.probs[i].p_replace, p);
      outcomes[i] = replacement_outcome(f.base.truths[i], t_rep, costs);
    }
    const double m = metric_value(outcomes, f.base.outcomes);
    best.m_hat_by_threshold.push_back(m);
    if (m < best.m_hat) {
      best.m_hat = m;
      best.p_thres = p;
    }
  }
  return best;
}

OrderingOptimum optimize_ordering_thresholds(std::span<const PredictionTrace> traces,
                                             std::span<const UnitTruth> truths,
                                             const TimeGrid& grid, const CostModel& costs,
                                             const ThresholdGrid& order_grid,
                                             const ThresholdGrid& rep_grid) {
  order_grid.validate();
  rep_grid.validate();
  const PreparedFleet f =
      prepare(traces, truths, grid, costs, Setting::Ordering, PerfectMode::AlwaysPreventive);
  const std::size_t n = f.base.truths.size();

  // Replacement times depend only on p_rep; order times only on p_order.
  std::vector<std::vector<std::optional<double>>> rep_times(rep_grid.values.size(),
                                                            std::vector<std::optional<double>>(n));
  for (std::size_t r = 0; r < rep_grid.values.size(); ++r)
    for (std::size_t i = 0; i < n; ++i)
      rep_times[r][i] = first_crossing(f.probs[i].times, f.probs[i].p_replace, rep_grid.values[r]);

  OrderingOptimum best;
  best.m_hat = std::numeric_limits<double>::infinity();
  std::vector<std::optional<double>> order_times(n);
  std::vector<LifecycleOutcome> outcomes(n);
  for (double po : order_grid.values) {
    for (std::size_t i = 0; i < n; ++i)
      order_times[i] = first_crossing(f.probs[i].times, f.probs[i].p_order, po);
    for (std::size_t r = 0; r < rep_grid.values.size(); ++r) {
      for (std::size_t i = 0; i < n; ++i) {
        const auto& t_rep = rep_times[r][i];
        std::optional<double> t_ord = order_times[i];
        // Orders scheduled after the life-cycle ended were never placed.
        const double end = t_rep && *t_rep < f.base.truths[i].failure_time ? *t_rep
                                                                          : f.base.truths[i].failure_time;
        if (t_ord && *t_ord > end) t_ord.reset();
        outcomes[i] = ordering_outcome(f.base.truths[i], t_rep, t_ord, costs);
      }
      const double m = metric_value(outcomes, f.base.outcomes);
      if (m < best.m_hat) {
        best = {po, rep_grid.values[r], m};
      }
    }
  }
  return best;
}

HyperparameterChoice select_hyperparameter_config(std::span<const HyperparameterCandidate> candidates,
                                                  std::span<const UnitTruth> truths,
                                                  const TimeGrid& grid, const CostModel& costs,
                                                  const DecisionPolicy& policy) {
  if (candidates.empty()) throw InputError("no hyperparameter candidates");
  HyperparameterChoice choice;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const FleetEvaluation ev = evaluate_fleet(candidates[c].traces, truths, grid, costs, policy);
    choice.m_hats.push_back(ev.m_hat);
    if (ev.m_hat < best) {
      best = ev.m_hat;
      choice.index = c;
      choice.label = candidates[c].label;
    }
  }
  return choice;
}

}  // namespace pdm
