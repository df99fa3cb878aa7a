#include "pdm/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pdm {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kUpperQuantile = 0.9999;
constexpr int kBracketPoints = 512;
constexpr double kInvPhi = 0.6180339887498949;

void require_probability(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(what) + " must lie in (0, 1)");
}

struct Minimum {
  double x = 0.0;
  double fx = std::numeric_limits<double>::infinity();
};

template <class F>
Minimum golden_section(F&& f, double lo, double hi, double tol) {
  double c = hi - kInvPhi * (hi - lo);
  double d = lo + kInvPhi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 200 && (hi - lo) > tol; ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - kInvPhi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + kInvPhi * (hi - lo);
      fd = f(d);
    }
  }
  return fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
}

// Dense uniform scan of (lo, hi] then golden-section refinement around the best point.
template <class F>
Minimum bracket_and_refine(F&& f, double lo, double hi, int points) {
  Minimum best;
  int best_i = 0;
  const double step = (hi - lo) / points;
  for (int i = 1; i <= points; ++i) {
    const double x = i == points ? hi : lo + step * i;
    const double fx = f(x);
    if (fx < best.fx) {
      best = {x, fx};
      best_i = i;
    }
  }
  const double a = lo + step * (best_i - 1);
  const double b = best_i == points ? hi : lo + step * (best_i + 1);
  const double tol = 1e-10 * std::max(std::abs(hi), 1.0);
  const Minimum refined = golden_section(f, a, b, tol);
  return refined.fx < best.fx ? refined : best;
}

double renewal_rate(double t_replace, double t_k, const RulDistribution& dist,
                    const CostModel& costs) {
  const double horizon = std::max(t_replace - t_k, 0.0);
  const double fail = prob_rul_leq(dist, horizon);
  const double p_pr = 1.0 - fail;
  const double denom = p_pr * t_replace + t_k * fail + truncated_mean_below(dist, horizon);
  if (std::isnan(denom)) throw NumericalError("renewal objective: life-cycle length is not a number");
  if (!(denom > 0.0)) throw DomainError("renewal objective: expected life-cycle length is not positive");
  return (p_pr * costs.c_p + fail * costs.c_c) / denom;
}

double opportunity_loss(double t_replace, double t_k, const RulDistribution& dist,
                        const CostModel& costs, double r_bar) {
  const double horizon = std::max(t_replace - t_k, 0.0);
  const double fail = prob_rul_leq(dist, horizon);
  return (1.0 - fail) * costs.c_p + fail * costs.c_c + r_bar * expected_exceedance(dist, horizon);
}

double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

}  // namespace

void HeuristicThreshold::validate() const { require_probability(p_thres, "p_thres"); }

void OrderingThresholds::validate() const {
  require_probability(p_order_thres, "p_order_thres");
  require_probability(p_rep_thres, "p_rep_thres");
}

void PopulationTtf::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw DomainError("population mean must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("population sigma must be > 0");
}

double PopulationTtf::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  const double z0 = normal_cdf(-mu / sigma);
  return (normal_cdf((t - mu) / sigma) - z0) / (1.0 - z0);
}

double PopulationTtf::pdf(double t) const {
  if (t <= 0.0) return 0.0;
  return phi((t - mu) / sigma) / (sigma * normal_cdf(mu / sigma));
}

double PopulationTtf::partial_mean(double t) const {
  if (t <= 0.0) return 0.0;
  const double a0 = -mu / sigma;
  const double at = (t - mu) / sigma;
  const double v = mu * (normal_cdf(at) - normal_cdf(a0)) - sigma * (phi(at) - phi(a0));
  return v / normal_cdf(mu / sigma);
}

double PopulationTtf::mean() const {
  const double a0 = -mu / sigma;
  return (mu * normal_cdf(-a0) + sigma * phi(a0)) / normal_cdf(mu / sigma);
}

PopulationTtf fit_population_ttf(std::span<const UnitTruth> truths) {
  if (truths.size() < 2) throw InputError("population fit needs at least two failure times");
  double m = 0.0;
  for (const auto& t : truths) m += t.failure_time;
  m /= static_cast<double>(truths.size());
  double v = 0.0;
  for (const auto& t : truths) v += (t.failure_time - m) * (t.failure_time - m);
  v /= static_cast<double>(truths.size() - 1);
  PopulationTtf pop{m, std::sqrt(v)};
  pop.validate();
  return pop;
}

ReplacementAction heuristic_step(const RulDistribution& dist, double delta_t,
                                 const HeuristicThreshold& params) {
  return prob_rul_leq(dist, delta_t) >= params.p_thres ? ReplacementAction::PreventiveReplace
                                                       : ReplacementAction::DoNothing;
}

double renewal_objective(double t_replace, double t_k, const RulDistribution& dist,
                         const CostModel& costs) {
  if (!(t_replace > t_k)) throw DomainError("renewal objective requires T_R > t_k");
  return renewal_rate(t_replace, t_k, as_full_distribution(dist), costs);
}

double opportunity_loss_objective(double t_replace, double t_k, const RulDistribution& dist,
                                  const CostModel& costs, double r_bar) {
  if (!(t_replace > t_k)) throw DomainError("opportunity-loss objective requires T_R > t_k");
  if (!(r_bar > 0.0)) throw DomainError("r_bar must be > 0");
  return opportunity_loss(t_replace, t_k, as_full_distribution(dist), costs, r_bar);
}

double age_replacement_rate(const PopulationTtf& pop, const CostModel& costs, double tau) {
  if (!(tau > 0.0)) throw DomainError("replacement age must be > 0");
  if (std::isinf(tau)) return costs.c_c / pop.mean();
  const double f = pop.cdf(tau);
  const double s = 1.0 - f;
  return (f * costs.c_c + s * costs.c_p) / (pop.partial_mean(tau) + tau * s);
}

double rbar_estimate(const PopulationTtf& pop, const CostModel& costs, RbarOption option) {
  pop.validate();
  const double lower = costs.c_p / pop.mean();
  if (option == RbarOption::LowerBoundPerfect) return lower;

  const double tau_hi = pop.mu + 10.0 * pop.sigma;
  const Minimum m = bracket_and_refine(
      [&](double tau) { return age_replacement_rate(pop, costs, tau); }, 0.0, tau_hi, 4096);
  // Option 1 is analytically >= c_p / mean; enforce it against rounding.
  const double upper = std::max({std::min(m.fx, costs.c_c / pop.mean()), lower});
  if (option == RbarOption::UpperBoundRenewal) return upper;
  return 0.5 * (upper + lower);
}

ReplacementOptimum optimal_replacement_time(double t_k, const RulDistribution& dist,
                                            const CostModel& costs,
                                            const ReplacementObjective& objective) {
  const RulDistribution full = as_full_distribution(dist);
  const auto eval = [&](double t_replace) {
    return std::visit(overloaded{
                          [&](const RenewalObjective&) {
                            return renewal_rate(t_replace, t_k, full, costs);
                          },
                          [&](const OpportunityLossObjective& o) {
                            return opportunity_loss(t_replace, t_k, full, costs, o.r_bar);
                          },
                      },
                      objective);
  };
  if (const auto* o = std::get_if<OpportunityLossObjective>(&objective); o && !(o->r_bar > 0.0))
    throw DomainError("r_bar must be > 0");
  const double q = quantile(full, kUpperQuantile);
  if (!std::isfinite(q)) throw NumericalError("RUL quantile overflows; cannot bound the replacement search");
  if (!(q > 0.0)) return {t_k, eval(t_k)};
  const Minimum m = bracket_and_refine(eval, t_k, t_k + q, kBracketPoints);
  if (!std::isfinite(m.fx)) throw NumericalError("replacement objective has no finite value on the search interval");
  return {m.x, m.fx};
}

double lead_window(double lead_time, double delta_t) {
  if (!(delta_t > 0.0)) throw DomainError("delta_t must be > 0");
  if (!(lead_time >= 0.0)) throw DomainError("lead time must be >= 0");
  return std::ceil(lead_time / delta_t - 1e-9) * delta_t;
}

std::pair<OrderAction, ReplacementAction> ordering_step(const RulDistribution& dist,
                                                        double delta_t, double lead_time,
                                                        const OrderingState& state,
                                                        const OrderingThresholds& params) {
  OrderAction order = OrderAction::NoOrder;
  if (!state.ordered) {
    const double horizon = lead_window(lead_time, delta_t) + delta_t;
    if (const auto* cdf = std::get_if<CdfPoints>(&dist)) {
      const bool has_point = std::any_of(cdf->points.begin(), cdf->points.end(), [&](const CdfPoint& p) {
        return std::abs(p.threshold - horizon) <= 1e-9 * delta_t;
      });
      if (!has_point)
        throw InputError("cdf points lack the ordering threshold " + std::to_string(horizon));
    }
    if (prob_rul_leq(dist, horizon) >= params.p_order_thres) order = OrderAction::Order;
  }
  const ReplacementAction rep = prob_rul_leq(dist, delta_t) >= params.p_rep_thres
                                    ? ReplacementAction::PreventiveReplace
                                    : ReplacementAction::DoNothing;
  return {order, rep};
}

LifecycleOutcome replacement_outcome(const UnitTruth& truth, std::optional<double> t_replace,
                                     const CostModel& costs) {
  LifecycleOutcome out;
  out.unit_id = truth.unit_id;
  if (t_replace && *t_replace < truth.failure_time) {
    out.t_lc = *t_replace;
    out.kind = ReplacementKind::Preventive;
    out.c_rep = costs.c_p;
  } else {
    out.t_lc = truth.failure_time;
    out.kind = ReplacementKind::Corrective;
    out.c_rep = costs.c_c;
  }
  out.c_m = out.c_rep;
  return out;
}

LifecycleOutcome ordering_outcome(const UnitTruth& truth, std::optional<double> t_replace,
                                  std::optional<double> t_order, const CostModel& costs) {
  LifecycleOutcome out = replacement_outcome(truth, t_replace, costs);
  const double ordered_at = t_order.value_or(out.t_lc);
  const double arrival = ordered_at + costs.lead_time;
  out.t_order = ordered_at;
  out.c_delay = std::max(arrival - out.t_lc, 0.0) * costs.c_unav;
  out.c_stock = std::max(out.t_lc - arrival, 0.0) * costs.c_inv;
  out.c_m = out.c_rep + out.c_delay + out.c_stock;
  return out;
}

namespace {

const TraceEntry& entry_at(const PredictionTrace& trace, const TimeGrid& grid, double t) {
  const TraceEntry* e = trace.find(t, grid.tolerance());
  if (e == nullptr)
    throw InputError("unit " + trace.unit_id + ": no prediction at decision time " + std::to_string(t));
  return *e;
}

void require_same_unit(const PredictionTrace& trace, const UnitTruth& truth) {
  if (trace.unit_id != truth.unit_id)
    throw InputError("trace " + trace.unit_id + " does not belong to unit " + truth.unit_id);
}

}  // namespace

LifecycleOutcome run_replacement_policy(const PredictionTrace& trace, const UnitTruth& truth,
                                        const TimeGrid& grid, const CostModel& costs,
                                        const ReplacementPolicy& policy) {
  require_same_unit(trace, truth);
  const int last = grid.last_step_before(truth.failure_time);
  for (int k = 1; k <= last; ++k) {
    const double t = grid.time(k);
    const RulDistribution& dist = entry_at(trace, grid, t).dist;
    const ReplacementAction action = std::visit(
        overloaded{
            [&](const HeuristicThreshold& p) { return heuristic_step(dist, grid.delta_t, p); },
            [&](const RenewalObjective& o) {
              const auto opt = optimal_replacement_time(t, dist, costs, o);
              return scheduled_replacement_step(t, grid.delta_t, opt.t_replace);
            },
            [&](const OpportunityLossObjective& o) {
              const auto opt = optimal_replacement_time(t, dist, costs, o);
              return scheduled_replacement_step(t, grid.delta_t, opt.t_replace);
            },
        },
        policy);
    if (action == ReplacementAction::PreventiveReplace) return replacement_outcome(truth, t, costs);
  }
  return replacement_outcome(truth, std::nullopt, costs);
}

LifecycleOutcome run_ordering_policy(const PredictionTrace& trace, const UnitTruth& truth,
                                     const TimeGrid& grid, const CostModel& costs,
                                     const OrderingThresholds& params) {
  require_same_unit(trace, truth);
  OrderingState state;
  std::optional<double> t_order;
  const int last = grid.last_step_before(truth.failure_time);
  for (int k = 1; k <= last; ++k) {
    const double t = grid.time(k);
    const auto [order, rep] =
        ordering_step(entry_at(trace, grid, t).dist, grid.delta_t, costs.lead_time, state, params);
    if (order == OrderAction::Order) {
      t_order = t;
      state.ordered = true;
    }
    if (rep == ReplacementAction::PreventiveReplace) return ordering_outcome(truth, t, t_order, costs);
  }
  return ordering_outcome(truth, std::nullopt, t_order, costs);
}

LifecycleOutcome perfect_outcome_replacement(const UnitTruth& truth, const TimeGrid& grid,
                                             const CostModel& costs, PerfectMode mode) {
  const int k = grid.last_step_before(truth.failure_time);
  if (k < 1)
    throw InfeasiblePerfectError("unit " + truth.unit_id + " fails before the first decision time");
  const double t_replace = grid.time(k);
  if (mode == PerfectMode::AllowFailure &&
      costs.c_c / truth.failure_time < costs.c_p / t_replace) {
    return replacement_outcome(truth, std::nullopt, costs);
  }
  return replacement_outcome(truth, t_replace, costs);
}

LifecycleOutcome perfect_outcome_ordering(const UnitTruth& truth, const TimeGrid& grid,
                                          const CostModel& costs) {
  LifecycleOutcome out = perfect_outcome_replacement(truth, grid, costs);
  const double t_order = out.t_lc - costs.lead_time;
  if (t_order < -grid.tolerance())
    throw InfeasiblePerfectError("unit " + truth.unit_id +
                                 ": perfect replacement time is shorter than the lead time");
  out.t_order = std::max(t_order, 0.0);
  return out;
}

}  // namespace pdm
