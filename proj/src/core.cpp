#include "pdm/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/distributions/normal.hpp>

namespace pdm {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kWeightSumTolerance = 1e-9;

void require_nonnegative(double x, const char* what) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be a finite value >= 0, got " + std::to_string(x));
  }
}

double lognormal_mean(const Lognormal& d) { return std::exp(d.mu + 0.5 * d.sigma * d.sigma); }

double cdf_points_eval(const CdfPoints& d, double x) {
  const auto& pts = d.points;
  if (x <= pts.front().threshold) return pts.front().prob;
  if (x >= pts.back().threshold) return pts.back().prob;
  auto hi = std::upper_bound(pts.begin(), pts.end(), x,
                             [](double v, const CdfPoint& p) { return v < p.threshold; });
  auto lo = std::prev(hi);
  const double w = (x - lo->threshold) / (hi->threshold - lo->threshold);
  return lo->prob + w * (hi->prob - lo->prob);
}

}  // namespace

TimeGrid::TimeGrid(double delta_t_, int max_steps_) : delta_t(delta_t_), max_steps(max_steps_) {
  if (!(delta_t > 0.0) || !std::isfinite(delta_t)) throw DomainError("delta_t must be positive");
  if (max_steps < 1) throw DomainError("max_steps must be >= 1");
}

bool TimeGrid::on_grid(double t) const {
  const double k = std::round(t / delta_t);
  return k >= 1.0 && std::abs(t - k * delta_t) <= tolerance();
}

int TimeGrid::last_step_before(double t) const {
  const double q = t / delta_t;
  const double n = std::round(q);
  double k = std::abs(q - n) <= 1e-9 ? n - 1.0 : std::floor(q);
  k = std::min(k, static_cast<double>(max_steps));
  return k < 1.0 ? 0 : static_cast<int>(k);
}

void CostModel::validate() const {
  if (!std::isfinite(c_p) || !(c_p > 0.0)) throw DomainError("c_p must be > 0");
  if (!std::isfinite(c_c) || !(c_c > c_p)) throw DomainError("c_c must exceed c_p");
  require_nonnegative(c_unav, "c_unav");
  require_nonnegative(c_inv, "c_inv");
  require_nonnegative(lead_time, "lead_time");
}

void validate(const RulDistribution& dist) {
  std::visit(overloaded{
                 [](const Lognormal& d) {
                   if (!std::isfinite(d.mu)) throw DomainError("lognormal mu must be finite");
                   if (!(d.sigma > 0.0) || !std::isfinite(d.sigma))
                     throw DomainError("lognormal sigma must be > 0");
                 },
                 [](const PointMass& d) { require_nonnegative(d.value, "point mass value"); },
                 [](const WeightedSamples& d) {
                   if (d.values.empty()) throw DomainError("weighted samples must be nonempty");
                   if (d.values.size() != d.weights.size())
                     throw DomainError("weighted samples: values and weights differ in length");
                   double sum = 0.0;
                   for (std::size_t i = 0; i < d.values.size(); ++i) {
                     require_nonnegative(d.values[i], "sample value");
                     require_nonnegative(d.weights[i], "sample weight");
                     sum += d.weights[i];
                   }
                   if (std::abs(sum - 1.0) > kWeightSumTolerance)
                     throw DomainError("sample weights must sum to 1, got " + std::to_string(sum));
                 },
                 [](const CdfPoints& d) {
                   if (d.points.empty()) throw DomainError("cdf point set must be nonempty");
                   for (std::size_t i = 0; i < d.points.size(); ++i) {
                     const auto& p = d.points[i];
                     require_nonnegative(p.threshold, "cdf threshold");
                     if (!(p.prob >= 0.0 && p.prob <= 1.0))
                       throw DomainError("cdf probability must lie in [0, 1]");
                     if (i > 0) {
                       if (!(p.threshold > d.points[i - 1].threshold))
                         throw DomainError("cdf thresholds must be strictly increasing");
                       if (p.prob < d.points[i - 1].prob)
                         throw DomainError("cdf probabilities must be nondecreasing");
                     }
                   }
                 },
             },
             dist);
}

const char* kind_name(const RulDistribution& dist) {
  return std::visit(overloaded{
                        [](const Lognormal&) { return "lognormal"; },
                        [](const PointMass&) { return "point_mass"; },
                        [](const WeightedSamples&) { return "weighted_samples"; },
                        [](const CdfPoints&) { return "cdf_points"; },
                    },
                    dist);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double prob_rul_leq(const RulDistribution& dist, double x) {
  if (!(x >= 0.0)) throw DomainError("prob_rul_leq: x must be >= 0");
  return std::visit(overloaded{
                        [x](const Lognormal& d) {
                          if (x == 0.0) return 0.0;
                          return normal_cdf((std::log(x) - d.mu) / d.sigma);
                        },
                        [x](const PointMass& d) { return d.value <= x ? 1.0 : 0.0; },
                        [x](const WeightedSamples& d) {
                          double p = 0.0;
                          for (std::size_t i = 0; i < d.values.size(); ++i)
                            if (d.values[i] <= x) p += d.weights[i];
                          return std::min(p, 1.0);
                        },
                        [x](const CdfPoints& d) { return cdf_points_eval(d, x); },
                    },
                    dist);
}

double truncated_mean_below(const RulDistribution& dist, double T) {
  if (!(T >= 0.0)) throw DomainError("truncated_mean_below: T must be >= 0");
  return std::visit(
      overloaded{
          [T](const Lognormal& d) {
            if (T == 0.0) return 0.0;
            if (std::isinf(T)) return lognormal_mean(d);
            return lognormal_mean(d) * normal_cdf((std::log(T) - d.mu - d.sigma * d.sigma) / d.sigma);
          },
          [T](const PointMass& d) { return d.value <= T ? d.value : 0.0; },
          [T](const WeightedSamples& d) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.values.size(); ++i)
              if (d.values[i] <= T) m += d.weights[i] * d.values[i];
            return m;
          },
          [](const CdfPoints&) -> double {
            throw DomainError("partial moments need a full distribution; fit the cdf points first");
          },
      },
      dist);
}

double expected_exceedance(const RulDistribution& dist, double T) {
  if (!(T >= 0.0)) throw DomainError("expected_exceedance: T must be >= 0");
  return std::visit(
      overloaded{
          [T](const Lognormal& d) {
            if (T == 0.0) return lognormal_mean(d);
            if (std::isinf(T)) return 0.0;
            const double a = (std::log(T) - d.mu) / d.sigma;
            const double v = lognormal_mean(d) * normal_cdf(d.sigma - a) - T * normal_cdf(-a);
            return std::max(v, 0.0);
          },
          [T](const PointMass& d) { return std::max(d.value - T, 0.0); },
          [T](const WeightedSamples& d) {
            double m = 0.0;
            for (std::size_t i = 0; i < d.values.size(); ++i)
              if (d.values[i] > T) m += d.weights[i] * (d.values[i] - T);
            return m;
          },
          [](const CdfPoints&) -> double {
            throw DomainError("partial moments need a full distribution; fit the cdf points first");
          },
      },
      dist);
}

double mean(const RulDistribution& dist) {
  return std::visit(overloaded{
                        [](const Lognormal& d) { return lognormal_mean(d); },
                        [](const PointMass& d) { return d.value; },
                        [](const WeightedSamples& d) {
                          return std::inner_product(d.values.begin(), d.values.end(),
                                                    d.weights.begin(), 0.0);
                        },
                        [](const CdfPoints&) -> double {
                          throw DomainError("mean needs a full distribution; fit the cdf points first");
                        },
                    },
                    dist);
}

double quantile(const RulDistribution& dist, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in (0, 1)");
  return std::visit(
      overloaded{
          [p](const Lognormal& d) { return std::exp(d.mu + d.sigma * normal_quantile(p)); },
          [](const PointMass& d) { return d.value; },
          [p](const WeightedSamples& d) {
            std::vector<std::size_t> order(d.values.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::sort(order.begin(), order.end(),
                      [&](std::size_t a, std::size_t b) { return d.values[a] < d.values[b]; });
            double cum = 0.0;
            for (std::size_t i : order) {
              cum += d.weights[i];
              if (cum >= p - 1e-12) return d.values[i];
            }
            return d.values[order.back()];
          },
          [p](const CdfPoints& d) {
            const auto& pts = d.points;
            if (p <= pts.front().prob) return 0.0;
            for (std::size_t i = 1; i < pts.size(); ++i) {
              if (p <= pts[i].prob) {
                const double w = (p - pts[i - 1].prob) / (pts[i].prob - pts[i - 1].prob);
                return pts[i - 1].threshold + w * (pts[i].threshold - pts[i - 1].threshold);
              }
            }
            throw DomainError("quantile lies beyond the last cdf point");
          },
      },
      dist);
}

Lognormal fit_lognormal_from_two_cdf_points(double a, double p_a, double b, double p_b) {
  if (!(a > 0.0) || !(b > a) || !std::isfinite(b))
    throw DomainError("two-point fit requires 0 < a < b");
  const auto clamp = [](double p) { return std::clamp(p, kCdfClampEps, 1.0 - kCdfClampEps); };
  p_a = clamp(p_a);
  p_b = clamp(p_b);
  if (!(p_a < p_b))
    throw DegenerateFitError("two-point fit requires P(RUL <= a) < P(RUL <= b) after clamping");
  const double z_a = normal_quantile(p_a);
  const double z_b = normal_quantile(p_b);
  const double sigma = (std::log(b) - std::log(a)) / (z_b - z_a);
  const double mu = std::log(a) - sigma * z_a;
  return Lognormal{mu, sigma};
}

Lognormal fit_lognormal_from_samples(const WeightedSamples& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    if (!(s.values[i] > 0.0)) throw DegenerateFitError("lognormal fit needs positive samples");
    m += s.weights[i] * std::log(s.values[i]);
  }
  double v = 0.0;
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const double d = std::log(s.values[i]) - m;
    v += s.weights[i] * d * d;
  }
  if (!(v > 0.0)) throw DegenerateFitError("lognormal fit needs samples with spread");
  return Lognormal{m, std::sqrt(v)};
}

RulDistribution as_full_distribution(const RulDistribution& dist) {
  const auto* cdf = std::get_if<CdfPoints>(&dist);
  if (cdf == nullptr) return dist;
  auto first = std::find_if(cdf->points.begin(), cdf->points.end(),
                            [](const CdfPoint& p) { return p.threshold > 0.0; });
  if (first == cdf->points.end() || std::next(first) == cdf->points.end())
    throw DegenerateFitError("a lognormal fit needs two cdf points with positive thresholds");
  const CdfPoint& last = cdf->points.back();
  return fit_lognormal_from_two_cdf_points(first->threshold, first->prob, last.threshold, last.prob);
}

const TraceEntry* PredictionTrace::find(double t, double tolerance) const {
  auto it = std::lower_bound(entries.begin(), entries.end(), t - tolerance,
                             [](const TraceEntry& e, double v) { return e.t < v; });
  if (it != entries.end() && std::abs(it->t - t) <= tolerance) return &*it;
  return nullptr;
}

void validate(const PredictionTrace& trace, const TimeGrid& grid) {
  for (std::size_t i = 0; i < trace.entries.size(); ++i) {
    const auto& e = trace.entries[i];
    if (!std::isfinite(e.t) || !grid.on_grid(e.t))
      throw InputError("unit " + trace.unit_id + ": time " + std::to_string(e.t) +
                       " is not on the decision grid");
    if (i > 0 && !(e.t > trace.entries[i - 1].t))
      throw InputError("unit " + trace.unit_id + ": trace times must be strictly increasing");
    validate(e.dist);
  }
}

}  // namespace pdm
