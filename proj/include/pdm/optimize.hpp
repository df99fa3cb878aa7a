#pragma once

#include <span>
#include <string>
#include <vector>

#include "pdm/core.hpp"
#include "pdm/evaluation.hpp"
#include "pdm/policies.hpp"

namespace pdm {

struct ThresholdGrid {
  std::vector<double> values;  // strictly increasing, each in (0, 1)

  void validate() const;
  // start, start + step, ... up to stop (inclusive within rounding).
  static ThresholdGrid uniform(double start, double stop, double step);
  // 0.01, 0.02, ..., 0.99
  static ThresholdGrid standard();
  // The grid with extra points merged in.
  ThresholdGrid with(std::span<const double> extra) const;
};

struct ThresholdOptimum {
  double p_thres = 0.0;
  double m_hat = 0.0;
  std::vector<double> m_hat_by_threshold;  // aligned with the grid
};

// Exhaustive search; ties go to the smaller threshold.
ThresholdOptimum optimize_heuristic_threshold(std::span<const PredictionTrace> traces,
                                              std::span<const UnitTruth> truths,
                                              const TimeGrid& grid, const CostModel& costs,
                                              const ThresholdGrid& thresholds,
                                              PerfectMode mode = PerfectMode::AlwaysPreventive);

struct OrderingOptimum {
  double p_order_thres = 0.0;
  double p_rep_thres = 0.0;
  double m_hat = 0.0;
};

// Exhaustive search over the product grid; ties go to the smaller p_order, then p_rep.
OrderingOptimum optimize_ordering_thresholds(std::span<const PredictionTrace> traces,
                                             std::span<const UnitTruth> truths,
                                             const TimeGrid& grid, const CostModel& costs,
                                             const ThresholdGrid& order_grid,
                                             const ThresholdGrid& rep_grid);

// One fleet of predictions from a model trained under one hyperparameter setting.
struct HyperparameterCandidate {
  std::string label;
  std::vector<PredictionTrace> traces;
};

struct HyperparameterChoice {
  std::string label;
  std::size_t index = 0;
  std::vector<double> m_hats;  // aligned with the candidates
};

// argmin of M-hat over candidates under a fixed policy; ties go to the first.
HyperparameterChoice select_hyperparameter_config(std::span<const HyperparameterCandidate> candidates,
                                                  std::span<const UnitTruth> truths,
                                                  const TimeGrid& grid, const CostModel& costs,
                                                  const DecisionPolicy& policy);

}  // namespace pdm
