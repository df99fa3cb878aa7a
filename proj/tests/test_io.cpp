#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "pdm/io.hpp"
#include "pdm/simulator.hpp"

using namespace pdm;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path p = fs::temp_directory_path() / ("pdm_io_test_" + std::to_string(::getpid()));
  fs::create_directories(p);
  return p;
}

std::vector<PredictionTrace> parse_traces_text(const std::string& s) {
  std::istringstream in(s);
  return io::parse_traces(in);
}

std::vector<UnitTruth> parse_truths_text(const std::string& s) {
  std::istringstream in(s);
  return io::parse_truths(in);
}

bool same_dist(const RulDistribution& a, const RulDistribution& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const T& y = std::get<T>(b);
        if constexpr (std::is_same_v<T, Lognormal>) return x.mu == y.mu && x.sigma == y.sigma;
        if constexpr (std::is_same_v<T, PointMass>) return x.value == y.value;
        if constexpr (std::is_same_v<T, WeightedSamples>) return x.values == y.values && x.weights == y.weights;
        if constexpr (std::is_same_v<T, CdfPoints>) {
          if (x.points.size() != y.points.size()) return false;
          for (std::size_t i = 0; i < x.points.size(); ++i)
            if (x.points[i].threshold != y.points[i].threshold || x.points[i].prob != y.points[i].prob) return false;
          return true;
        }
      },
      a);
}

std::vector<PredictionTrace> mixed_fleet(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<PredictionTrace> fleet;
  const int n = 1 + static_cast<int>(rng() % 4);
  for (int i = 0; i < n; ++i) {
    PredictionTrace tr{"unit-" + std::to_string(i), {}};
    const int m = 1 + static_cast<int>(rng() % 5);
    for (int k = 1; k <= m; ++k) {
      RulDistribution d;
      switch (rng() % 4) {
        case 0: d = Lognormal{std::log(1.0 + 300.0 * u(rng)), 0.01 + u(rng)}; break;
        case 1: d = PointMass{300.0 * u(rng)}; break;
        case 2: d = WeightedSamples{{u(rng) * 100, u(rng) * 200}, {0.25, 0.75}}; break;
        default: d = CdfPoints{{{10.0, 0.1 * u(rng)}, {30.0, 0.1 + 0.9 * u(rng)}}}; break;
      }
      tr.entries.push_back({10.0 * k, d});
    }
    fleet.push_back(std::move(tr));
  }
  return fleet;
}

}  // namespace

TEST(Traces, EmptyAndSingle) {
  EXPECT_TRUE(parse_traces_text("").empty());
  const auto one = parse_traces_text(R"({"unit_id":"a","t":10,"dist":{"kind":"lognormal","mu":3.0,"sigma":0.4}})");
  ASSERT_EQ(one.size(), 1u);
  ASSERT_EQ(one[0].entries.size(), 1u);
  EXPECT_EQ(std::get<Lognormal>(one[0].entries[0].dist).mu, 3.0);
}

TEST(Traces, GroupsAndSorts) {
  const auto fleet = parse_traces_text(
      R"({"unit_id":"b","t":20,"dist":{"kind":"point_mass","value":5}}
{"unit_id":"a","t":10,"dist":{"kind":"point_mass","value":1}}

{"unit_id":"b","t":10,"dist":{"kind":"cdf_points","points":[[10,0.2],[30,0.5]]}}
)");
  ASSERT_EQ(fleet.size(), 2u);
  EXPECT_EQ(fleet[0].unit_id, "b");
  ASSERT_EQ(fleet[0].entries.size(), 2u);
  EXPECT_EQ(fleet[0].entries[0].t, 10.0);
  EXPECT_TRUE(std::holds_alternative<CdfPoints>(fleet[0].entries[0].dist));
}

TEST(Traces, ErrorsCarryLineNumbers) {
  try {
    parse_traces_text("{\"unit_id\":\"a\",\"t\":10,\"dist\":{\"kind\":\"point_mass\",\"value\":1}}\n{broken\n");
    FAIL() << "no error";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_traces_text(R"({"unit_id":"a","t":10,"dist":{"kind":"gamma","k":1}})"), InputError);
  EXPECT_THROW(parse_traces_text(R"({"unit_id":"a","t":10})"), InputError);
  EXPECT_THROW(parse_traces_text(R"({"unit_id":"a","t":10,"dist":{"kind":"lognormal","mu":1,"sigma":-1}})"),
               InputError);
  EXPECT_THROW(parse_traces_text("{\"unit_id\":\"a\",\"t\":10,\"dist\":{\"kind\":\"point_mass\",\"value\":1}}\n"
                                 "{\"unit_id\":\"a\",\"t\":10,\"dist\":{\"kind\":\"point_mass\",\"value\":2}}\n"),
               InputError);
}

TEST(Traces, RejectNonFinite) {
  EXPECT_THROW(parse_traces_text(R"({"unit_id":"a","t":10,"dist":{"kind":"point_mass","value":NaN}})"), InputError);
  EXPECT_THROW(parse_traces_text(R"({"unit_id":"a","t":10,"dist":{"kind":"point_mass","value":1e999}})"), InputError);
  EXPECT_THROW(parse_traces_text(R"({"unit_id":"a","t":Infinity,"dist":{"kind":"point_mass","value":1}})"), InputError);
}

TEST(Property, TraceRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000; ++i) {
    const auto fleet = mixed_fleet(rng);
    std::ostringstream out;
    io::format_traces(out, fleet);
    const auto back = parse_traces_text(out.str());
    ASSERT_EQ(back.size(), fleet.size());
    for (std::size_t u = 0; u < fleet.size(); ++u) {
      ASSERT_EQ(back[u].unit_id, fleet[u].unit_id);
      ASSERT_EQ(back[u].entries.size(), fleet[u].entries.size());
      for (std::size_t k = 0; k < fleet[u].entries.size(); ++k) {
        ASSERT_EQ(back[u].entries[k].t, fleet[u].entries[k].t);
        ASSERT_TRUE(same_dist(back[u].entries[k].dist, fleet[u].entries[k].dist));
      }
    }
  }
}

TEST(Property, TruthRoundTrip) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<UnitTruth> truths;
    for (int k = 0; k < 1 + static_cast<int>(rng() % 10); ++k)
      truths.push_back({"u" + std::to_string(k), 1e-3 + 1e4 * u(rng)});
    std::ostringstream out;
    io::format_truths(out, truths);
    const auto back = parse_truths_text(out.str());
    ASSERT_EQ(back.size(), truths.size());
    for (std::size_t k = 0; k < truths.size(); ++k) {
      ASSERT_EQ(back[k].unit_id, truths[k].unit_id);
      ASSERT_EQ(back[k].failure_time, truths[k].failure_time);
    }
  }
}

TEST(Truths, Rejections) {
  EXPECT_THROW(parse_truths_text("id,tf\na,1\n"), InputError);
  EXPECT_THROW(parse_truths_text("unit_id,failure_time\na,nan\n"), InputError);
  EXPECT_THROW(parse_truths_text("unit_id,failure_time\na,inf\n"), InputError);
  EXPECT_THROW(parse_truths_text("unit_id,failure_time\na,-3\n"), InputError);
  EXPECT_THROW(parse_truths_text("unit_id,failure_time\na,3\na,4\n"), InputError);
  EXPECT_THROW(parse_truths_text("unit_id,failure_time\na,3,4\n"), InputError);
  EXPECT_TRUE(parse_truths_text("").empty());
  std::ostringstream out;
  const std::vector<UnitTruth> bad{{"a,b", 1.0}};
  EXPECT_THROW(io::format_truths(out, bad), InputError);
}

TEST(Config, SimulatorRoundTripAndValidation) {
  SimulatorConfig c;
  c.mu_tf = 201.5;
  c.n_units = 17;
  c.seed = 12345678901234ULL;
  c.sigma_ln_eps = 0.15;
  std::ostringstream out;
  io::format_simulator_config(out, c);
  std::istringstream in(out.str());
  const SimulatorConfig back = io::parse_simulator_config(in);
  EXPECT_EQ(back.mu_tf, c.mu_tf);
  EXPECT_EQ(back.n_units, c.n_units);
  EXPECT_EQ(back.seed, c.seed);
  EXPECT_EQ(back.sigma_ln_eps, c.sigma_ln_eps);
  EXPECT_EQ(back.grid.delta_t, c.grid.delta_t);

  const auto parse = [](const std::string& s) {
    std::istringstream i(s);
    return io::parse_simulator_config(i);
  };
  EXPECT_EQ(parse("{}").n_units, 2000);
  EXPECT_THROW(parse(R"({"n_units": 0})"), ConfigError);
  EXPECT_THROW(parse(R"({"sigma_ln_eps": -1})"), ConfigError);
  EXPECT_THROW(parse(R"({"bogus": 1})"), ConfigError);
  EXPECT_THROW(parse("[1,2]"), ConfigError);
}

TEST(Config, CostModel) {
  std::istringstream in(R"({"c_p": 100, "c_c": 1000, "c_unav": 10, "c_inv": 1, "lead_time": 20})");
  const CostModel c = io::parse_cost_model(in);
  EXPECT_EQ(c.c_p, 100.0);
  EXPECT_EQ(c.lead_time, 20.0);
  std::istringstream bad(R"({"c_p": 100, "c_c": 50})");
  EXPECT_THROW(io::parse_cost_model(bad), ConfigError);
}

TEST(Report, RoundTripAt17Digits) {
  const Fleet f = [] {
    SimulatorConfig c;
    c.n_units = 20;
    return sample_fleet(c);
  }();
  io::Report r;
  r.setting = "replacement";
  r.policy = "heuristic";
  r.costs = CostModel{1.0, 10.0};
  r.parameters["p_thres"] = 0.1;
  r.evaluation = evaluate_fleet(f.traces, f.truths, TimeGrid(10.0, 100), r.costs,
                                HeuristicThreshold{0.1});
  r.evaluation.m_hat = 0.12345678901234567;
  std::ostringstream out;
  io::format_report(out, r);
  std::istringstream in(out.str());
  const io::Report back = io::parse_report(in);
  EXPECT_EQ(back.evaluation.m_hat, r.evaluation.m_hat);
  EXPECT_EQ(back.evaluation.r_hat, r.evaluation.r_hat);
  EXPECT_EQ(*back.evaluation.var_m_hat, *r.evaluation.var_m_hat);
  EXPECT_EQ(back.evaluation.ci95_m->lo, r.evaluation.ci95_m->lo);
  EXPECT_EQ(back.parameters.at("p_thres"), 0.1);
  ASSERT_EQ(back.evaluation.outcomes.size(), 20u);
  EXPECT_EQ(back.evaluation.outcomes[3].t_lc, r.evaluation.outcomes[3].t_lc);
  EXPECT_EQ(back.evaluation.outcomes[3].kind, r.evaluation.outcomes[3].kind);
  EXPECT_EQ(back.setting, "replacement");
}

TEST(Sweep, RoundTripAndShape) {
  std::vector<io::SweepRow> rows;
  for (double ratio : {0.02, 0.05, 0.1})
    for (const char* p : {"heuristic", "renewal"}) rows.push_back({ratio, p, ratio * 3.3, ratio, ratio * 5});
  std::ostringstream out;
  io::format_sweep(out, rows);
  std::istringstream in(out.str());
  const auto back = io::parse_sweep(in);
  ASSERT_EQ(back.size(), 6u);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].cost_ratio, rows[i].cost_ratio);
    EXPECT_EQ(back[i].policy, rows[i].policy);
    EXPECT_EQ(back[i].m_hat, rows[i].m_hat);
  }
  std::istringstream bad("cost_ratio,policy,m_hat,ci_lo,ci_hi\n0.1,h,nan,0,0\n");
  EXPECT_THROW(io::parse_sweep(bad), InputError);
}

TEST(Files, AtomicWriteAndErrors) {
  const fs::path dir = temp_dir();
  SimulatorConfig c;
  c.n_units = 3;
  const Fleet f = sample_fleet(c);
  io::write_traces(f.traces, dir / "t.jsonl");
  io::write_truths(f.truths, dir / "u.csv");
  EXPECT_FALSE(fs::exists(dir / "t.jsonl.tmp"));
  const auto traces = io::read_traces(dir / "t.jsonl");
  ASSERT_EQ(traces.size(), 3u);
  EXPECT_EQ(traces[1].entries.size(), f.traces[1].entries.size());
  EXPECT_EQ(io::read_truths(dir / "u.csv")[2].failure_time, f.truths[2].failure_time);
  EXPECT_THROW(io::read_truths(dir / "missing.csv"), InputError);
  EXPECT_THROW(io::write_truths(f.truths, dir / "no" / "such" / "dir.csv"), InputError);
  fs::remove_all(dir);
}

TEST(Numbers, ShortestRoundTrip) {
  EXPECT_EQ(io::format_number(0.1), "0.1");
  EXPECT_EQ(io::format_number(240.0), "240");
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(rng);
    ASSERT_EQ(std::stod(io::format_number(x)), x);
  }
}
