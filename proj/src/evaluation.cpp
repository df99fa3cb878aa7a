#include "pdm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>
#include <unordered_set>

namespace pdm {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct Moments {
  double mean_c = 0.0;
  double mean_t = 0.0;
  double var_c = 0.0;
  double var_t = 0.0;
  double cov = 0.0;
};

Moments sample_moments(std::span<const LifecycleOutcome> xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (const auto& o : xs) {
    m.mean_c += o.c_m;
    m.mean_t += o.t_lc;
  }
  m.mean_c /= n;
  m.mean_t /= n;
  if (xs.size() < 2) return m;
  for (const auto& o : xs) {
    const double dc = o.c_m - m.mean_c;
    const double dt = o.t_lc - m.mean_t;
    m.var_c += dc * dc;
    m.var_t += dt * dt;
    m.cov += dc * dt;
  }
  m.var_c /= n - 1.0;
  m.var_t /= n - 1.0;
  m.cov /= n - 1.0;
  return m;
}

void check_outcomes(std::span<const LifecycleOutcome> xs) {
  if (xs.empty()) throw InputError("renewal ratio of an empty fleet");
  for (const auto& o : xs)
    if (!(o.t_lc > 0.0)) throw InputError("unit " + o.unit_id + ": life-cycle length must be > 0");
}

}  // namespace

double renewal_ratio(std::span<const LifecycleOutcome> outcomes) {
  check_outcomes(outcomes);
  const Moments m = sample_moments(outcomes);
  return m.mean_c / m.mean_t;
}

RatioVariance renewal_ratio_variance(std::span<const LifecycleOutcome> outcomes) {
  check_outcomes(outcomes);
  if (outcomes.size() < 2) throw InputError("ratio variance needs at least two units");
  const Moments m = sample_moments(outcomes);
  const double et2 = m.mean_t * m.mean_t;
  const double v = (m.var_c / et2 + m.mean_c * m.mean_c * m.var_t / (et2 * et2) -
                    2.0 * m.mean_c * m.cov / (et2 * m.mean_t)) /
                   static_cast<double>(outcomes.size());
  if (v < 0.0) return {0.0, true};
  return {v, false};
}

double metric_value(std::span<const LifecycleOutcome> outcomes,
                    std::span<const LifecycleOutcome> perfect_outcomes) {
  const double r = renewal_ratio(outcomes);
  const double rp = renewal_ratio(perfect_outcomes);
  return (r - rp) / rp;
}

FleetEvaluation metric(std::vector<LifecycleOutcome> outcomes,
                       std::vector<LifecycleOutcome> perfect_outcomes) {
  if (outcomes.size() != perfect_outcomes.size())
    throw InputError("policy and perfect outcomes cover different fleets");
  {
    std::vector<std::string> a, b;
    for (const auto& o : outcomes) a.push_back(o.unit_id);
    for (const auto& o : perfect_outcomes) b.push_back(o.unit_id);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (std::adjacent_find(a.begin(), a.end()) != a.end())
      throw InputError("duplicate unit id in policy outcomes");
    if (a != b) throw InputError("policy and perfect outcomes cover different units");
  }

  FleetEvaluation ev;
  ev.n_units = outcomes.size();
  ev.r_hat = renewal_ratio(outcomes);
  ev.r_perfect = renewal_ratio(perfect_outcomes);
  ev.m_hat = (ev.r_hat - ev.r_perfect) / ev.r_perfect;
  if (ev.n_units >= 2) {
    const RatioVariance v = renewal_ratio_variance(outcomes);
    const RatioVariance vp = renewal_ratio_variance(perfect_outcomes);
    ev.var_r_hat = v.value;
    ev.var_r_perfect = vp.value;
    ev.variance_clamped = v.clamped || vp.clamped;
    ev.var_m_hat = v.value / (ev.r_perfect * ev.r_perfect);
    const double half = 1.96 * std::sqrt(*ev.var_m_hat);
    ev.ci95_m = Interval{ev.m_hat - half, ev.m_hat + half};
  }
  ev.outcomes = std::move(outcomes);
  ev.perfect_outcomes = std::move(perfect_outcomes);
  return ev;
}

Interval bootstrap_ci_m(std::span<const LifecycleOutcome> outcomes,
                        std::span<const LifecycleOutcome> perfect_outcomes, int resamples,
                        std::uint64_t seed, double level) {
  if (outcomes.size() != perfect_outcomes.size() || outcomes.empty())
    throw InputError("bootstrap needs paired, nonempty outcome sets");
  if (resamples < 2) throw ConfigError("bootstrap needs at least two resamples");
  if (!(level > 0.0 && level < 1.0)) throw ConfigError("confidence level must lie in (0, 1)");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < perfect_outcomes.size(); ++i) index[perfect_outcomes[i].unit_id] = i;

  const std::size_t n = outcomes.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    double c = 0, t = 0, cp = 0, tp = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& o = outcomes[pick(rng)];
      const auto& p = perfect_outcomes[index.at(o.unit_id)];
      c += o.c_m;
      t += o.t_lc;
      cp += p.c_m;
      tp += p.t_lc;
    }
    const double rp = cp / tp;
    ms.push_back((c / t - rp) / rp);
  }
  std::sort(ms.begin(), ms.end());
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(ms.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const double w = pos - static_cast<double>(i);
    return i + 1 < ms.size() ? ms[i] * (1 - w) + ms[i + 1] * w : ms[i];
  };
  const double alpha = 0.5 * (1.0 - level);
  return {at(alpha), at(1.0 - alpha)};
}

double bootstrap_variance_r(std::span<const LifecycleOutcome> outcomes, int resamples,
                            std::uint64_t seed) {
  check_outcomes(outcomes);
  if (resamples < 2) throw ConfigError("bootstrap needs at least two resamples");
  const std::size_t n = outcomes.size();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  double sum = 0.0, sum2 = 0.0;
  for (int b = 0; b < resamples; ++b) {
    double c = 0, t = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const auto& o = outcomes[pick(rng)];
      c += o.c_m;
      t += o.t_lc;
    }
    const double r = c / t;
    sum += r;
    sum2 += r * r;
  }
  const double B = static_cast<double>(resamples);
  return (sum2 - sum * sum / B) / (B - 1.0);
}

std::vector<const PredictionTrace*> match_traces(std::span<const PredictionTrace> traces,
                                                 std::span<const UnitTruth> truths) {
  std::unordered_map<std::string, const PredictionTrace*> by_id;
  for (const auto& t : traces) {
    if (!by_id.emplace(t.unit_id, &t).second) throw InputError("duplicate trace for unit " + t.unit_id);
  }
  std::unordered_set<std::string> seen;
  std::vector<const PredictionTrace*> out;
  out.reserve(truths.size());
  for (const auto& truth : truths) {
    if (!seen.insert(truth.unit_id).second) throw InputError("duplicate truth for unit " + truth.unit_id);
    auto it = by_id.find(truth.unit_id);
    if (it == by_id.end()) throw InputError("no prediction trace for unit " + truth.unit_id);
    out.push_back(it->second);
  }
  return out;
}

PerfectBaseline perfect_baseline(std::span<const UnitTruth> truths, const TimeGrid& grid,
                                 const CostModel& costs, Setting setting, PerfectMode mode) {
  PerfectBaseline base;
  for (const auto& truth : truths) {
    try {
      base.outcomes.push_back(setting == Setting::Ordering
                                  ? perfect_outcome_ordering(truth, grid, costs)
                                  : perfect_outcome_replacement(truth, grid, costs, mode));
      base.truths.push_back(truth);
    } catch (const InfeasiblePerfectError&) {
      base.excluded_units.push_back(truth.unit_id);
    }
  }
  return base;
}

FleetEvaluation evaluate_fleet(std::span<const PredictionTrace> traces,
                               std::span<const UnitTruth> truths, const TimeGrid& grid,
                               const CostModel& costs, const DecisionPolicy& policy,
                               PerfectMode mode) {
  costs.validate();
  std::visit(overloaded{
                 [](const HeuristicThreshold& p) { p.validate(); },
                 [](const OrderingThresholds& p) { p.validate(); },
                 [](const OpportunityLossObjective& p) {
                   if (!(p.r_bar > 0.0)) throw DomainError("r_bar must be > 0");
                 },
                 [](const RenewalObjective&) {},
             },
             policy);
  PerfectBaseline base = perfect_baseline(truths, grid, costs, setting_of(policy), mode);
  const auto matched = match_traces(traces, base.truths);

  std::vector<LifecycleOutcome> outcomes;
  outcomes.reserve(base.truths.size());
  for (std::size_t i = 0; i < base.truths.size(); ++i) {
    const PredictionTrace& trace = *matched[i];
    const UnitTruth& truth = base.truths[i];
    outcomes.push_back(std::visit(
        overloaded{
            [&](const OrderingThresholds& p) { return run_ordering_policy(trace, truth, grid, costs, p); },
            [&](const HeuristicThreshold& p) {
              return run_replacement_policy(trace, truth, grid, costs, p);
            },
            [&](const RenewalObjective& p) { return run_replacement_policy(trace, truth, grid, costs, p); },
            [&](const OpportunityLossObjective& p) {
              return run_replacement_policy(trace, truth, grid, costs, p);
            },
        },
        policy));
  }
  FleetEvaluation ev = metric(std::move(outcomes), std::move(base.outcomes));
  ev.excluded_units = std::move(base.excluded_units);
  return ev;
}

}  // namespace pdm
