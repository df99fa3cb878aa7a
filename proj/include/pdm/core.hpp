#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pdm/error.hpp"

namespace pdm {

// Decision times are t_k = k * delta_t for k = 1..max_steps.
struct TimeGrid {
  double delta_t = 1.0;
  int max_steps = 1;

  TimeGrid() = default;
  TimeGrid(double delta_t, int max_steps);

  double time(int k) const { return k * delta_t; }
  // Absolute tolerance used for all grid-membership and tie comparisons.
  double tolerance() const { return 1e-9 * delta_t; }
  bool on_grid(double t) const;
  // Largest k >= 1 with t_k strictly below t (within tolerance), or 0.
  int last_step_before(double t) const;
};

struct CostModel {
  double c_p = 1.0;     // preventive replacement
  double c_c = 10.0;    // corrective replacement
  double c_unav = 0.0;  // unavailability, per unit time
  double c_inv = 0.0;   // inventory holding, per unit time
  double lead_time = 0.0;

  void validate() const;
};

// RUL representations produced by prognostic models.
struct Lognormal {
  double mu = 0.0;
  double sigma = 1.0;
};

struct PointMass {
  double value = 0.0;
};

struct WeightedSamples {
  std::vector<double> values;
  std::vector<double> weights;
};

struct CdfPoint {
  double threshold = 0.0;
  double prob = 0.0;
};

// Pointwise CDF values, e.g. from classifiers trained on RUL <= threshold labels.
struct CdfPoints {
  std::vector<CdfPoint> points;
};

using RulDistribution = std::variant<Lognormal, PointMass, WeightedSamples, CdfPoints>;

// Throws DomainError if the representation's invariants do not hold.
void validate(const RulDistribution& dist);

const char* kind_name(const RulDistribution& dist);

/// P(RUL <= x). Linear interpolation between cdf points, clamped outside them.
double prob_rul_leq(const RulDistribution& dist, double x);

/// Partial first moment E[RUL * 1{RUL <= T}].
double truncated_mean_below(const RulDistribution& dist, double T);

/// E[max(RUL - T, 0)], the expected life remaining beyond T.
double expected_exceedance(const RulDistribution& dist, double T);

double mean(const RulDistribution& dist);

/// Smallest x with P(RUL <= x) >= p.
double quantile(const RulDistribution& dist, double p);

// Probabilities are clamped into [eps, 1 - eps] before quantile inversion.
inline constexpr double kCdfClampEps = 1e-6;

Lognormal fit_lognormal_from_two_cdf_points(double a, double p_a, double b, double p_b);

// Weighted moments of ln(value); requires strictly positive values.
Lognormal fit_lognormal_from_samples(const WeightedSamples& samples);

// Representation usable for partial moments: cdf point sets are replaced by a
// lognormal fitted through their first and last points, others pass through.
RulDistribution as_full_distribution(const RulDistribution& dist);

double normal_cdf(double z);
double normal_quantile(double p);

struct TraceEntry {
  double t = 0.0;
  RulDistribution dist;
};

struct PredictionTrace {
  std::string unit_id;
  std::vector<TraceEntry> entries;  // strictly increasing in t

  // Entry whose time matches t within the grid tolerance, or nullptr.
  const TraceEntry* find(double t, double tolerance) const;
};

void validate(const PredictionTrace& trace, const TimeGrid& grid);

struct UnitTruth {
  std::string unit_id;
  double failure_time = 0.0;
};

enum class ReplacementKind { Preventive, Corrective };

struct LifecycleOutcome {
  std::string unit_id;
  double t_lc = 0.0;
  ReplacementKind kind = ReplacementKind::Preventive;
  double c_rep = 0.0;
  std::optional<double> t_order;
  double c_delay = 0.0;
  double c_stock = 0.0;
  double c_m = 0.0;
};

}  // namespace pdm
