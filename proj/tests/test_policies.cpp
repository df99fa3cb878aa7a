#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pdm/policies.hpp"
#include "pdm/simulator.hpp"

using namespace pdm;

namespace {

constexpr int kInstances = 1000;

const TimeGrid kGrid(10.0, 100);

// 0.9999 quantile of the lognormal found by bisection on the oracle CDF.
double upper_quantile(double mu, double sigma) {
  double lo = 0.0, hi = std::exp(mu + 10.0 * sigma);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle::lognormal_cdf(mu, sigma, mid) < 0.9999 ? lo : hi) = mid;
  }
  return hi;
}

PredictionTrace point_mass_trace(const UnitTruth& truth) {
  const std::vector<UnitTruth> one{truth};
  return point_mass_traces(one, kGrid).front();
}

double replacement_time_or_inf(const LifecycleOutcome& o) {
  return o.kind == ReplacementKind::Preventive ? o.t_lc : std::numeric_limits<double>::infinity();
}

}  // namespace

TEST(HeuristicStep, Examples) {
  const WeightedSamples p20{{5.0, 100.0}, {0.2, 0.8}};
  const WeightedSamples p05{{5.0, 100.0}, {0.05, 0.95}};
  EXPECT_EQ(heuristic_step(p20, 10.0, {0.1}), ReplacementAction::PreventiveReplace);
  EXPECT_EQ(heuristic_step(p05, 10.0, {0.1}), ReplacementAction::DoNothing);
  for (double p : {0.01, 0.5, 0.999}) EXPECT_EQ(heuristic_step(PointMass{5.0}, 10.0, {p}), ReplacementAction::PreventiveReplace);
  EXPECT_THROW((HeuristicThreshold{0.0}.validate()), DomainError);
  EXPECT_THROW((HeuristicThreshold{1.0}.validate()), DomainError);
}

TEST(RenewalObjective, PointMassCases) {
  const CostModel c{1.0, 10.0};
  EXPECT_DOUBLE_EQ(renewal_objective(120.0, 100.0, PointMass{40.0}, c), 1.0 / 120.0);
  EXPECT_DOUBLE_EQ(renewal_objective(180.0, 100.0, PointMass{40.0}, c), 10.0 / 140.0);
  EXPECT_THROW(renewal_objective(100.0, 100.0, PointMass{40.0}, c), DomainError);
}

TEST(RenewalObjective, LognormalMatchesQuadrature) {
  const Lognormal d{std::log(50.0), 0.3};
  constexpr double kFrozen = 0.022049846361391633;
  const double v = renewal_objective(140.0, 100.0, d, CostModel{1.0, 10.0});
  EXPECT_NEAR(v, kFrozen, 1e-6 * kFrozen);
  EXPECT_NEAR(oracle::renewal_rate_quadrature(d.mu, d.sigma, 100.0, 140.0, 1.0, 10.0), kFrozen, 1e-10 * kFrozen);
}

TEST(OpportunityLoss, PointMassCases) {
  const CostModel c{1.0, 10.0};
  const double r_bar = 0.02;
  // Replacing after half the remaining life forfeits the other half.
  EXPECT_DOUBLE_EQ(opportunity_loss_objective(120.0, 100.0, PointMass{40.0}, c, r_bar), 1.0 + r_bar * 20.0);
  // At or beyond the failure point nothing is forfeited but the unit fails first.
  EXPECT_DOUBLE_EQ(expected_exceedance(PointMass{40.0}, 40.0), 0.0);
  EXPECT_DOUBLE_EQ(opportunity_loss_objective(140.0, 100.0, PointMass{40.0}, c, r_bar), 10.0);
  EXPECT_DOUBLE_EQ(opportunity_loss_objective(139.999, 100.0, PointMass{40.0}, c, r_bar), 1.0 + r_bar * 0.001);
  EXPECT_THROW(opportunity_loss_objective(120.0, 100.0, PointMass{40.0}, c, 0.0), DomainError);
}

TEST(OpportunityLoss, LognormalMatchesQuadrature) {
  const Lognormal d{std::log(50.0), 0.3};
  constexpr double kFrozen = 3.3301688914162568;
  const double v = opportunity_loss_objective(140.0, 100.0, d, CostModel{1.0, 10.0}, 0.02);
  EXPECT_NEAR(v, kFrozen, 1e-6 * kFrozen);
  EXPECT_NEAR(oracle::opportunity_loss_quadrature(d.mu, d.sigma, 100.0, 140.0, 1.0, 10.0, 0.02), kFrozen,
              1e-10 * kFrozen);
}

TEST(Objectives, RandomLognormalsMatchQuadrature) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double mu = std::log(20.0 + 200.0 * u(rng));
    const double sigma = 0.1 + 0.6 * u(rng);
    const double t_k = 10.0 * (1 + static_cast<int>(rng() % 30));
    const double t_r = t_k + std::exp(mu) * (0.1 + 1.5 * u(rng));
    const CostModel c{1.0, 1.0 / (0.02 + 0.5 * u(rng))};
    const double r_bar = 0.001 + 0.05 * u(rng);
    const Lognormal d{mu, sigma};
    const double p2 = oracle::renewal_rate_quadrature(mu, sigma, t_k, t_r, c.c_p, c.c_c);
    const double p3 = oracle::opportunity_loss_quadrature(mu, sigma, t_k, t_r, c.c_p, c.c_c, r_bar);
    EXPECT_NEAR(renewal_objective(t_r, t_k, d, c), p2, 1e-6 * p2) << i;
    EXPECT_NEAR(opportunity_loss_objective(t_r, t_k, d, c, r_bar), p3, 1e-6 * p3) << i;
  }
}

TEST(OptimalReplacement, PointMass) {
  const CostModel c{1.0, 10.0};
  const double r = 40.0;
  const auto p2 = optimal_replacement_time(100.0, PointMass{r}, c, RenewalObjective{});
  EXPECT_NEAR(p2.t_replace, 140.0, 1e-6 * r);
  EXPECT_LT(p2.t_replace, 140.0);
  const auto p3 = optimal_replacement_time(100.0, PointMass{r}, c, OpportunityLossObjective{0.05});
  EXPECT_NEAR(p3.t_replace, 140.0, 1e-6 * r);
  EXPECT_LT(p3.t_replace, 140.0);
}

TEST(OptimalReplacement, LognormalMatchesGridOracle) {
  const Lognormal d{std::log(50.0), 0.3};
  // Frozen from a 1e5-point grid of quadrature evaluations over (t_k, t_k + q].
  constexpr double kArgmin = 120.90885078871347;
  constexpr double kValue = 0.0084070823077004742;
  const auto opt = optimal_replacement_time(100.0, d, CostModel{1.0, 10.0}, RenewalObjective{});
  EXPECT_NEAR(opt.t_replace, kArgmin, 0.05);
  EXPECT_NEAR(opt.value, kValue, 1e-6 * kValue);
}

TEST(OptimalReplacement, RandomLognormalsMatchGridOracle) {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double mu = std::log(20.0 + 200.0 * u(rng));
    const double sigma = 0.1 + 0.5 * u(rng);
    const double t_k = 10.0 * (1 + static_cast<int>(rng() % 30));
    const CostModel c{1.0, 1.0 / (0.02 + 0.5 * u(rng))};
    const double r_bar = 0.001 + 0.05 * u(rng);
    const Lognormal d{mu, sigma};
    const double q = upper_quantile(mu, sigma);

    const auto g2 = oracle::grid_minimum(
        [&](double t) { return oracle::renewal_rate_closed(mu, sigma, t_k, t, c.c_p, c.c_c); }, t_k, t_k + q,
        100000);
    const auto o2 = optimal_replacement_time(t_k, d, c, RenewalObjective{});
    EXPECT_NEAR(o2.t_replace, g2.x, 0.05) << i;
    EXPECT_NEAR(o2.value, g2.fx, 1e-6 * g2.fx) << i;
    EXPECT_LE(o2.value, g2.fx * (1.0 + 1e-12)) << i;

    const auto g3 = oracle::grid_minimum(
        [&](double t) { return oracle::opportunity_loss_closed(mu, sigma, t_k, t, c.c_p, c.c_c, r_bar); }, t_k,
        t_k + q, 100000);
    const auto o3 = optimal_replacement_time(t_k, d, c, OpportunityLossObjective{r_bar});
    EXPECT_NEAR(o3.t_replace, g3.x, 0.05) << i;
    EXPECT_NEAR(o3.value, g3.fx, 1e-6 * g3.fx) << i;
  }
}

TEST(ScheduledStep, Boundary) {
  EXPECT_EQ(scheduled_replacement_step(100.0, 10.0, 109.0), ReplacementAction::PreventiveReplace);
  EXPECT_EQ(scheduled_replacement_step(100.0, 10.0, 110.0), ReplacementAction::PreventiveReplace);
  EXPECT_EQ(scheduled_replacement_step(100.0, 10.0, 125.0), ReplacementAction::DoNothing);
}

TEST(Rbar, LowerBound) {
  const PopulationTtf pop{225.0, 40.0};
  EXPECT_NEAR(rbar_estimate(pop, CostModel{100.0, 1000.0}, RbarOption::LowerBoundPerfect), 100.0 / 225.0,
              1e-6 * 100.0 / 225.0);
}

TEST(Rbar, UpperBoundMatchesGridOracle) {
  const PopulationTtf pop{225.0, 40.0};
  constexpr double kFrozen = 0.0082242387885353863;  // tau grid step 0.1 over (0, 500], trapezoid
  const double v = rbar_estimate(pop, CostModel{1.0, 10.0}, RbarOption::UpperBoundRenewal);
  EXPECT_NEAR(v, kFrozen, 1e-6 * kFrozen);
  const auto g = oracle::age_replacement_grid(225.0, 40.0, 1.0, 10.0, 0.1, 500.0);
  EXPECT_NEAR(g.value, kFrozen, 1e-12 * kFrozen);
}

TEST(Rbar, UpperBoundRandomPopulations) {
  std::mt19937_64 rng(44);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const double mu = 50.0 + 400.0 * u(rng);
    const double sigma = mu * (0.05 + 0.3 * u(rng));
    const CostModel c{1.0, 1.0 / (0.02 + 0.5 * u(rng))};
    const auto g = oracle::age_replacement_grid(mu, sigma, c.c_p, c.c_c, 0.01, mu + 10.0 * sigma);
    const double v = rbar_estimate({mu, sigma}, c, RbarOption::UpperBoundRenewal);
    EXPECT_NEAR(v, g.value, 1e-6 * g.value) << i;
  }
}

TEST(Rbar, UpperBoundApproachesLowerAsCostsMerge) {
  const PopulationTtf pop{225.0, 40.0};
  const double lower = rbar_estimate(pop, CostModel{1.0, 1.0 + 1e-9}, RbarOption::LowerBoundPerfect);
  double prev = std::numeric_limits<double>::infinity();
  for (double cc : {2.0, 1.5, 1.1, 1.01, 1.0001}) {
    const double v = rbar_estimate(pop, CostModel{1.0, cc}, RbarOption::UpperBoundRenewal);
    EXPECT_GE(v, lower);
    EXPECT_LE(v, prev);
    prev = v;
  }
  EXPECT_NEAR(prev, lower, 1e-3 * lower);
}

TEST(Property, RbarOptionOrdering) {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kInstances; ++i) {
    const PopulationTtf pop{5.0 + 500.0 * u(rng), 1.0 + 200.0 * u(rng)};
    const double cp = 0.1 + 100.0 * u(rng);
    const CostModel c{cp, cp * (1.0 + 1e-3 + 100.0 * u(rng))};
    const double r1 = rbar_estimate(pop, c, RbarOption::UpperBoundRenewal);
    const double r2 = rbar_estimate(pop, c, RbarOption::LowerBoundPerfect);
    const double r3 = rbar_estimate(pop, c, RbarOption::AverageOfBounds);
    ASSERT_GE(r1, r3) << i;
    ASSERT_GE(r3, r2) << i;
  }
}

TEST(Property, OpportunityLossConservatismOrdering) {
  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const PopulationTtf pop{225.0, 40.0};
  for (int i = 0; i < kInstances; ++i) {
    const double mu = std::log(10.0 + 200.0 * u(rng));
    const double sigma = 0.1 + 0.6 * u(rng);
    const double t_k = 10.0 * (1 + static_cast<int>(rng() % 20));
    const CostModel c{1.0, 1.0 / (0.02 + 0.5 * u(rng))};
    const double hi = rbar_estimate(pop, c, RbarOption::UpperBoundRenewal);
    const double lo = rbar_estimate(pop, c, RbarOption::LowerBoundPerfect);
    const double q = upper_quantile(mu, sigma);
    const auto g_hi = oracle::grid_minimum(
        [&](double t) { return oracle::opportunity_loss_closed(mu, sigma, t_k, t, c.c_p, c.c_c, hi); }, t_k,
        t_k + q, 2000);
    const auto g_lo = oracle::grid_minimum(
        [&](double t) { return oracle::opportunity_loss_closed(mu, sigma, t_k, t, c.c_p, c.c_c, lo); }, t_k,
        t_k + q, 2000);
    ASSERT_GE(g_hi.x, g_lo.x) << i;
    const Lognormal d{mu, sigma};
    const double t_hi = optimal_replacement_time(t_k, d, c, OpportunityLossObjective{hi}).t_replace;
    const double t_lo = optimal_replacement_time(t_k, d, c, OpportunityLossObjective{lo}).t_replace;
    ASSERT_GE(t_hi, t_lo - 1e-6 * q) << i;
  }
}

TEST(Ordering, LeadWindow) {
  EXPECT_DOUBLE_EQ(lead_window(20.0, 10.0), 20.0);
  EXPECT_DOUBLE_EQ(lead_window(15.0, 10.0), 20.0);
  EXPECT_DOUBLE_EQ(lead_window(0.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(lead_window(20.000000001, 10.0), 20.0);
}

TEST(Ordering, StepExamples) {
  const WeightedSamples d{{25.0, 100.0}, {0.15, 0.85}};
  const OrderingThresholds params{0.1, 0.5};
  auto [o, r] = ordering_step(d, 10.0, 20.0, OrderingState{false}, params);
  EXPECT_EQ(o, OrderAction::Order);
  EXPECT_EQ(r, ReplacementAction::DoNothing);
  std::tie(o, r) = ordering_step(PointMass{5.0}, 10.0, 20.0, OrderingState{true}, params);
  EXPECT_EQ(o, OrderAction::NoOrder);
  EXPECT_EQ(r, ReplacementAction::PreventiveReplace);
}

TEST(Ordering, CdfPointsNeedTheOrderingThreshold) {
  const CdfPoints missing{{{10.0, 0.2}, {20.0, 0.4}}};
  const CdfPoints present{{{10.0, 0.2}, {30.0, 0.4}}};
  const OrderingThresholds params{0.3, 0.5};
  EXPECT_THROW(ordering_step(missing, 10.0, 20.0, OrderingState{false}, params), InputError);
  EXPECT_EQ(ordering_step(present, 10.0, 20.0, OrderingState{false}, params).first, OrderAction::Order);
  EXPECT_NO_THROW(ordering_step(missing, 10.0, 20.0, OrderingState{true}, params));
}

TEST(Ordering, CostFormulas) {
  CostModel c{100.0, 1000.0, 10.0, 1.0, 20.0};
  const UnitTruth late{"a", 500.0};
  const auto delay = ordering_outcome(late, 180.0, 170.0, c);
  EXPECT_DOUBLE_EQ(delay.c_delay, 100.0);
  EXPECT_DOUBLE_EQ(delay.c_stock, 0.0);
  EXPECT_DOUBLE_EQ(delay.c_m, 200.0);

  const auto stock = ordering_outcome(late, 180.0, 150.0, c);
  EXPECT_DOUBLE_EQ(stock.c_stock, 10.0);
  EXPECT_DOUBLE_EQ(stock.c_delay, 0.0);

  const auto exact = ordering_outcome(late, 180.0, 160.0, c);
  EXPECT_DOUBLE_EQ(exact.c_stock, 0.0);
  EXPECT_DOUBLE_EQ(exact.c_delay, 0.0);

  // A unit that fails without an order waits the whole lead time.
  const auto unordered = ordering_outcome(UnitTruth{"b", 247.0}, std::nullopt, std::nullopt, c);
  EXPECT_EQ(unordered.kind, ReplacementKind::Corrective);
  EXPECT_DOUBLE_EQ(unordered.c_delay, 200.0);
  EXPECT_DOUBLE_EQ(unordered.c_m, 1200.0);
}

TEST(RunReplacement, PointMassTrace) {
  const UnitTruth truth{"u", 247.0};
  const CostModel c{1.0, 10.0};
  const auto o = run_replacement_policy(point_mass_trace(truth), truth, kGrid, c, HeuristicThreshold{0.5});
  EXPECT_EQ(o.kind, ReplacementKind::Preventive);
  EXPECT_DOUBLE_EQ(o.t_lc, 240.0);
  EXPECT_DOUBLE_EQ(o.c_rep, 1.0);
}

TEST(RunReplacement, NeverCrossingIsCorrective) {
  const UnitTruth truth{"u", 247.0};
  PredictionTrace tr{"u", {}};
  for (int k = 1; k <= 24; ++k) tr.entries.push_back({10.0 * k, PointMass{1000.0}});
  const auto o = run_replacement_policy(tr, truth, kGrid, CostModel{1.0, 10.0}, HeuristicThreshold{0.5});
  EXPECT_EQ(o.kind, ReplacementKind::Corrective);
  EXPECT_DOUBLE_EQ(o.t_lc, 247.0);
  EXPECT_DOUBLE_EQ(o.c_rep, 10.0);
  EXPECT_FALSE(o.t_order.has_value());
  EXPECT_EQ(o.c_delay + o.c_stock, 0.0);
}

TEST(RunReplacement, MissingEntryIsInputError) {
  const UnitTruth truth{"u", 247.0};
  PredictionTrace tr = point_mass_trace(truth);
  tr.entries.erase(tr.entries.begin() + 3);
  EXPECT_THROW(run_replacement_policy(tr, truth, kGrid, CostModel{}, HeuristicThreshold{0.5}), InputError);
  PredictionTrace other = point_mass_trace(truth);
  other.unit_id = "v";
  EXPECT_THROW(run_replacement_policy(other, truth, kGrid, CostModel{}, HeuristicThreshold{0.5}), InputError);
}

TEST(Perfect, Replacement) {
  const CostModel c{1.0, 10.0};
  EXPECT_DOUBLE_EQ(perfect_outcome_replacement({"a", 247.0}, kGrid, c).t_lc, 240.0);
  EXPECT_DOUBLE_EQ(perfect_outcome_replacement({"a", 240.0}, kGrid, c).t_lc, 230.0);
  EXPECT_THROW(perfect_outcome_replacement({"a", 10.0}, kGrid, c), InfeasiblePerfectError);

  const TimeGrid coarse(500.0, 10);
  const CostModel close{99.0, 100.0};
  const auto footnote = perfect_outcome_replacement({"a", 1000.0}, coarse, close, PerfectMode::AllowFailure);
  EXPECT_EQ(footnote.kind, ReplacementKind::Corrective);
  EXPECT_DOUBLE_EQ(footnote.t_lc, 1000.0);
  const auto strict = perfect_outcome_replacement({"a", 1000.0}, coarse, close);
  EXPECT_EQ(strict.kind, ReplacementKind::Preventive);
  EXPECT_DOUBLE_EQ(strict.t_lc, 500.0);
}

TEST(Perfect, Ordering) {
  CostModel c{1.0, 10.0, 1.0, 1.0, 20.0};
  const auto o = perfect_outcome_ordering({"a", 247.0}, kGrid, c);
  EXPECT_DOUBLE_EQ(*o.t_order, 220.0);
  EXPECT_DOUBLE_EQ(o.c_m, 1.0);
  c.lead_time = 0.0;
  EXPECT_DOUBLE_EQ(*perfect_outcome_ordering({"a", 247.0}, kGrid, c).t_order, 240.0);
  c.lead_time = 20.0;
  EXPECT_THROW(perfect_outcome_ordering({"a", 15.0}, kGrid, c), InfeasiblePerfectError);
}

TEST(Property, PointMassOptimality) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> tf(225.0, 40.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CostModel c{1.0, 10.0};
  const PopulationTtf pop{225.0, 40.0};
  const double r1 = rbar_estimate(pop, c, RbarOption::UpperBoundRenewal);
  const double r2 = rbar_estimate(pop, c, RbarOption::LowerBoundPerfect);
  for (int i = 0; i < kInstances; ++i) {
    double t = tf(rng);
    while (t <= 10.0) t = tf(rng);
    const UnitTruth truth{"u", t};
    const PredictionTrace tr = point_mass_trace(truth);
    const double perfect = perfect_outcome_replacement(truth, kGrid, c).t_lc;
    const double p = 0.001 + 0.998 * u(rng);
    const ReplacementPolicy policies[] = {HeuristicThreshold{p}, RenewalObjective{},
                                          OpportunityLossObjective{i % 2 ? r1 : r2}};
    for (const auto& pol : policies) {
      const auto o = run_replacement_policy(tr, truth, kGrid, c, pol);
      ASSERT_EQ(o.kind, ReplacementKind::Preventive) << i << " policy " << pol.index();
      ASSERT_DOUBLE_EQ(o.t_lc, perfect) << i << " policy " << pol.index();
      ASSERT_EQ(o.c_m, c.c_p);
    }
  }
}

TEST(Property, MonotoneThreshold) {
  SimulatorConfig cfg;
  cfg.n_units = kInstances;
  cfg.seed = 88;
  const Fleet fleet = sample_fleet(cfg);
  std::mt19937_64 rng(89);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CostModel c{1.0, 10.0};
  for (std::size_t i = 0; i < fleet.truths.size(); ++i) {
    double a = 0.001 + 0.998 * u(rng), b = 0.001 + 0.998 * u(rng);
    if (a > b) std::swap(a, b);
    const auto oa = run_replacement_policy(fleet.traces[i], fleet.truths[i], kGrid, c, HeuristicThreshold{a});
    const auto ob = run_replacement_policy(fleet.traces[i], fleet.truths[i], kGrid, c, HeuristicThreshold{b});
    ASSERT_LE(replacement_time_or_inf(oa), replacement_time_or_inf(ob)) << i;
  }
}

TEST(Property, CostAssembly) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < kInstances; ++i) {
    const CostModel c{1.0 + 10.0 * u(rng), 20.0 + 100.0 * u(rng), 5.0 * u(rng), 2.0 * u(rng),
                      10.0 * static_cast<double>(rng() % 5)};
    const UnitTruth truth{"u", 20.0 + 300.0 * u(rng)};
    std::optional<double> t_rep, t_ord;
    if (rng() % 4) t_rep = 10.0 * (1 + static_cast<int>(rng() % 35));
    if (rng() % 3) t_ord = 10.0 * (1 + static_cast<int>(rng() % 35));
    const auto o = rng() % 2 ? ordering_outcome(truth, t_rep, t_ord, c) : replacement_outcome(truth, t_rep, c);
    ASSERT_EQ(o.c_m, o.c_rep + o.c_delay + o.c_stock);
    ASSERT_FALSE(o.c_delay > 0.0 && o.c_stock > 0.0);
    ASSERT_GE(o.c_delay, 0.0);
    ASSERT_GE(o.c_stock, 0.0);
  }
}

TEST(Property, OrderingStateMachine) {
  SimulatorConfig cfg;
  cfg.n_units = kInstances;
  cfg.seed = 111;
  const Fleet fleet = sample_fleet(cfg);
  std::mt19937_64 rng(112);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CostModel c{100.0, 1000.0, 10.0, 1.0, 20.0};
  for (std::size_t i = 0; i < fleet.truths.size(); ++i) {
    const OrderingThresholds params{0.01 + 0.98 * u(rng), 0.01 + 0.98 * u(rng)};
    const auto& truth = fleet.truths[i];
    const auto& trace = fleet.traces[i];
    OrderingState state;
    int orders = 0;
    std::optional<double> first_order;
    for (int k = 1; k <= kGrid.last_step_before(truth.failure_time); ++k) {
      const auto [o, r] = ordering_step(trace.entries[k - 1].dist, kGrid.delta_t, c.lead_time, state, params);
      if (o == OrderAction::Order) {
        ++orders;
        if (!first_order) first_order = kGrid.time(k);
        state.ordered = true;
      }
      if (r == ReplacementAction::PreventiveReplace) break;
    }
    ASSERT_LE(orders, 1) << i;
    const auto out = run_ordering_policy(trace, truth, kGrid, c, params);
    ASSERT_TRUE(out.t_order.has_value());
    ASSERT_DOUBLE_EQ(*out.t_order, first_order.value_or(out.t_lc)) << i;
    ASSERT_EQ(out.c_m, out.c_rep + out.c_delay + out.c_stock);
    ASSERT_FALSE(out.c_delay > 0.0 && out.c_stock > 0.0);
  }
}

TEST(Population, FitAndMoments) {
  const std::vector<UnitTruth> t{{"a", 100.0}, {"b", 200.0}, {"c", 300.0}};
  const PopulationTtf pop = fit_population_ttf(t);
  EXPECT_DOUBLE_EQ(pop.mu, 200.0);
  EXPECT_DOUBLE_EQ(pop.sigma, 100.0);
  const PopulationTtf narrow{225.0, 40.0};
  EXPECT_NEAR(narrow.mean(), 225.0, 1e-4);
  EXPECT_NEAR(narrow.cdf(225.0), 0.5, 1e-7);
  EXPECT_NEAR(narrow.partial_mean(1e4), narrow.mean(), 1e-9);
  const double pm = oracle::integrate([&](double x) { return x * narrow.pdf(x); }, 0.0, 200.0);
  EXPECT_NEAR(narrow.partial_mean(200.0), pm, 1e-9 * pm);
  EXPECT_THROW(fit_population_ttf(std::vector<UnitTruth>{{"a", 1.0}}), InputError);
}
