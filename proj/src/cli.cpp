#include "pdm/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <set>

#include "CLI11.hpp"
#include "pdm/evaluation.hpp"
#include "pdm/io.hpp"
#include "pdm/optimize.hpp"
#include "pdm/simulator.hpp"

namespace pdm::cli {
namespace {

struct FleetArgs {
  std::string traces;
  std::string truths;
  double delta_t = 10.0;
  int max_steps = 1000000;
};

struct CostArgs {
  std::string file;
  double c_p = 1.0;
  double c_c = 10.0;
  double c_unav = 0.0;
  double c_inv = 0.0;
  double lead_time = 0.0;
};

struct GridArgs {
  std::vector<double> list;
  double start = 0.01;
  double stop = 0.99;
  double step = 0.01;
};

void add_fleet_options(CLI::App* cmd, FleetArgs& a) {
  cmd->add_option("--traces", a.traces, "Prediction trace file (JSON lines)")->required();
  cmd->add_option("--truths", a.truths, "Unit truth file (CSV)")->required();
  cmd->add_option("--delta-t", a.delta_t, "Decision interval")->capture_default_str();
  cmd->add_option("--max-steps", a.max_steps, "Number of decision times")->capture_default_str();
}

void add_cost_options(CLI::App* cmd, CostArgs& a, bool with_cc = true) {
  auto* file = cmd->add_option("--costs", a.file, "Cost model file (JSON)");
  std::vector<CLI::Option*> flags{
      cmd->add_option("--cp", a.c_p, "Preventive replacement cost")->capture_default_str(),
      cmd->add_option("--c-unav", a.c_unav, "Unavailability cost per unit time")->capture_default_str(),
      cmd->add_option("--c-inv", a.c_inv, "Inventory cost per unit time")->capture_default_str(),
      cmd->add_option("--lead-time", a.lead_time, "Ordering lead time")->capture_default_str(),
  };
  if (with_cc) flags.push_back(cmd->add_option("--cc", a.c_c, "Corrective replacement cost")->capture_default_str());
  for (auto* f : flags) file->excludes(f);
}

void add_grid_options(CLI::App* cmd, GridArgs& g, const std::string& prefix) {
  auto* list = cmd->add_option("--" + prefix + "thresholds", g.list, "Explicit threshold grid")->delimiter(',');
  auto* start = cmd->add_option("--" + prefix + "grid-start", g.start, "Threshold grid start")->capture_default_str();
  auto* stop = cmd->add_option("--" + prefix + "grid-stop", g.stop, "Threshold grid stop")->capture_default_str();
  auto* step = cmd->add_option("--" + prefix + "grid-step", g.step, "Threshold grid step")->capture_default_str();
  list->excludes(start)->excludes(stop)->excludes(step);
}

CostModel make_costs(const CostArgs& a) {
  if (!a.file.empty()) return io::read_cost_model(a.file);
  CostModel c{a.c_p, a.c_c, a.c_unav, a.c_inv, a.lead_time};
  try {
    c.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

ThresholdGrid make_grid(const GridArgs& g, bool list_given) {
  if (list_given) {
    ThresholdGrid grid{g.list};
    std::sort(grid.values.begin(), grid.values.end());
    grid.validate();
    return grid;
  }
  return ThresholdGrid::uniform(g.start, g.stop, g.step);
}

TimeGrid make_time_grid(const FleetArgs& a) {
  try {
    return TimeGrid(a.delta_t, a.max_steps);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

struct LoadedFleet {
  std::vector<PredictionTrace> traces;
  std::vector<UnitTruth> truths;
  TimeGrid grid;
};

LoadedFleet load_fleet(const FleetArgs& a, std::ostream& err) {
  LoadedFleet f{io::read_traces(a.traces), io::read_truths(a.truths), make_time_grid(a)};
  for (const auto& t : f.traces) validate(t, f.grid);
  err << "loaded " << f.truths.size() << " units from " << a.truths << '\n';
  return f;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  // splitmix64 finalizer; FNV alone leaves the high bits nearly constant across ids
  // that differ only in their last characters.
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}

std::vector<UnitTruth> subset(const std::vector<UnitTruth>& truths, double fraction, bool training) {
  std::vector<UnitTruth> out;
  for (const auto& t : truths)
    if (in_training_split(t.unit_id, fraction) == training) out.push_back(t);
  return out;
}

struct PolicyArgs {
  std::string policy = "heuristic";
  double p_thres = -1.0;
  double p_order = -1.0;
  double p_rep = -1.0;
  int rbar_option = 1;
  double rbar = -1.0;
};

void add_policy_options(CLI::App* cmd, PolicyArgs& p, std::string& setting) {
  cmd->add_option("--setting", setting, "replacement | ordering")
      ->check(CLI::IsMember({"replacement", "ordering"}))
      ->capture_default_str();
  cmd->add_option("--policy", p.policy, "heuristic | renewal | opportunity (replacement setting)")
      ->check(CLI::IsMember({"heuristic", "renewal", "opportunity"}))
      ->capture_default_str();
  cmd->add_option("--p-thres", p.p_thres, "Heuristic replacement threshold (default c_p/c_c)");
  cmd->add_option("--p-order", p.p_order, "Ordering threshold (default c_p/c_c)");
  cmd->add_option("--p-rep", p.p_rep, "Ordering-setting replacement threshold (default c_p/c_c)");
  auto* opt = cmd->add_option("--rbar-option", p.rbar_option, "1 upper bound, 2 lower bound, 3 average")
                  ->check(CLI::Range(1, 3))
                  ->capture_default_str();
  auto* val = cmd->add_option("--rbar", p.rbar, "Explicit long-run cost rate for the opportunity policy");
  val->excludes(opt);
}

std::string policy_label(const DecisionPolicy& p) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, HeuristicThreshold>) return "heuristic";
        if constexpr (std::is_same_v<T, RenewalObjective>) return "renewal";
        if constexpr (std::is_same_v<T, OpportunityLossObjective>) return "opportunity";
        return "ordering";
      },
      p);
}

DecisionPolicy make_policy(const PolicyArgs& p, const std::string& setting, const CostModel& costs,
                           std::span<const UnitTruth> population, std::map<std::string, double>& params,
                           CLI::App* cmd) {
  const double ratio = costs.c_p / costs.c_c;
  if (setting == "ordering") {
    if (cmd->count("--policy") || cmd->count("--p-thres") || cmd->count("--rbar") || cmd->count("--rbar-option"))
      throw ConfigError("replacement-policy flags given in the ordering setting");
    OrderingThresholds o{p.p_order < 0 ? ratio : p.p_order, p.p_rep < 0 ? ratio : p.p_rep};
    params["p_order_thres"] = o.p_order_thres;
    params["p_rep_thres"] = o.p_rep_thres;
    return o;
  }
  if (cmd->count("--p-order") || cmd->count("--p-rep"))
    throw ConfigError("ordering thresholds given in the replacement setting");
  if (p.policy != "heuristic" && cmd->count("--p-thres"))
    throw ConfigError("--p-thres only applies to the heuristic policy");
  if (p.policy != "opportunity" && (cmd->count("--rbar") || cmd->count("--rbar-option")))
    throw ConfigError("--rbar/--rbar-option only apply to the opportunity policy");
  if (p.policy == "heuristic") {
    HeuristicThreshold h{p.p_thres < 0 ? ratio : p.p_thres};
    params["p_thres"] = h.p_thres;
    return h;
  }
  if (p.policy == "renewal") return RenewalObjective{};
  double r_bar = p.rbar;
  if (r_bar < 0) {
    r_bar = rbar_estimate(fit_population_ttf(population), costs, static_cast<RbarOption>(p.rbar_option));
    params["rbar_option"] = p.rbar_option;
  }
  params["r_bar"] = r_bar;
  return OpportunityLossObjective{r_bar};
}

void print_evaluation(std::ostream& out, const FleetEvaluation& ev) {
  out << std::setprecision(10);
  out << "n_units " << ev.n_units << '\n';
  out << "r_hat " << ev.r_hat << '\n';
  out << "r_perfect " << ev.r_perfect << '\n';
  out << "m_hat " << ev.m_hat << '\n';
  if (ev.var_m_hat) out << "var_m_hat " << *ev.var_m_hat << '\n';
  if (ev.ci95_m) out << "ci95_m " << ev.ci95_m->lo << ' ' << ev.ci95_m->hi << '\n';
}

void warn_evaluation(std::ostream& err, const FleetEvaluation& ev) {
  if (!ev.excluded_units.empty())
    err << "warning: " << ev.excluded_units.size()
        << " unit(s) excluded, perfect baseline infeasible on the grid\n";
  if (ev.variance_clamped) err << "warning: negative delta-method variance clamped to 0\n";
}

std::vector<double> dedupe(std::vector<double> xs, const char* what, std::ostream& err) {
  std::vector<double> out;
  std::set<double> seen;
  for (double x : xs) {
    if (seen.insert(x).second) {
      out.push_back(x);
    } else {
      err << "warning: duplicate " << what << ' ' << x << " ignored\n";
    }
  }
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& traces_path,
                 const std::string& truths_path, std::ostream& out, std::ostream& err) {
  const SimulatorConfig config = io::read_simulator_config(config_path);
  err << "simulating " << config.n_units << " units (seed " << config.seed << ")\n";
  const Fleet fleet = sample_fleet(config);
  io::write_traces(fleet.traces, traces_path);
  io::write_truths(fleet.truths, truths_path);

  double m = 0.0;
  for (const auto& t : fleet.truths) m += t.failure_time;
  m /= static_cast<double>(fleet.truths.size());
  double v = 0.0;
  for (const auto& t : fleet.truths) v += (t.failure_time - m) * (t.failure_time - m);
  const double sd = fleet.truths.size() > 1 ? std::sqrt(v / static_cast<double>(fleet.truths.size() - 1)) : 0.0;
  out << std::setprecision(10) << "n_units " << fleet.truths.size() << "\nmean_tf " << m << "\nstd_tf " << sd
      << '\n';
  return kSuccess;
}

}  // namespace

bool in_training_split(const std::string& unit_id, double fraction) {
  if (fraction >= 1.0) return true;
  const double u = static_cast<double>(fnv1a(unit_id) >> 11) * 0x1.0p-53;
  return u < fraction;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Decision-oriented evaluation of RUL prognostics for predictive maintenance", "pdm"};
  app.require_subcommand(1);

  // simulate
  std::string sim_config, sim_traces, sim_truths;
  auto* simulate = app.add_subcommand("simulate", "Generate a virtual run-to-failure fleet");
  simulate->add_option("--config", sim_config, "Simulator config (JSON)")->required();
  simulate->add_option("--traces", sim_traces, "Output trace file")->required();
  simulate->add_option("--truths", sim_truths, "Output truth file")->required();

  // evaluate
  FleetArgs ev_fleet;
  CostArgs ev_costs;
  PolicyArgs ev_policy;
  std::string ev_setting = "replacement", ev_report, ev_ci = "normal";
  bool ev_allow_failure = false;
  int ev_resamples = 10000;
  std::uint64_t ev_seed = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Compute M-hat for a policy on a fleet");
  add_fleet_options(evaluate, ev_fleet);
  add_cost_options(evaluate, ev_costs);
  add_policy_options(evaluate, ev_policy, ev_setting);
  evaluate->add_flag("--perfect-allow-failure", ev_allow_failure,
                     "Let the perfect baseline run to failure when that is cheaper per unit time");
  evaluate->add_option("--ci", ev_ci, "normal | bootstrap")->check(CLI::IsMember({"normal", "bootstrap"}));
  evaluate->add_option("--bootstrap-resamples", ev_resamples)->capture_default_str();
  evaluate->add_option("--seed", ev_seed, "Bootstrap seed")->capture_default_str();
  evaluate->add_option("--report", ev_report, "Output report (JSON)");

  // optimize
  FleetArgs op_fleet;
  CostArgs op_costs;
  GridArgs op_grid, op_order_grid, op_rep_grid;
  std::string op_family = "heuristic", op_report;
  double op_split = 1.0;
  auto* optimize = app.add_subcommand("optimize", "Tune heuristic thresholds by minimizing M-hat");
  add_fleet_options(optimize, op_fleet);
  add_cost_options(optimize, op_costs);
  optimize->add_option("--family", op_family, "heuristic | ordering")
      ->check(CLI::IsMember({"heuristic", "ordering"}))
      ->capture_default_str();
  add_grid_options(optimize, op_grid, "");
  add_grid_options(optimize, op_order_grid, "order-");
  add_grid_options(optimize, op_rep_grid, "rep-");
  optimize->add_option("--split", op_split, "Fraction of units used for training")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  optimize->add_option("--report", op_report, "Output report for the evaluation units (JSON)");

  // sweep
  FleetArgs sw_fleet;
  CostArgs sw_costs;
  GridArgs sw_grid;
  std::vector<double> sw_ratios, sw_ccs;
  std::vector<std::string> sw_policies{"heuristic"};
  std::string sw_out;
  int sw_rbar_option = 1;
  auto* sweep = app.add_subcommand("sweep", "Evaluate policies over a range of cost ratios");
  add_fleet_options(sweep, sw_fleet);
  add_cost_options(sweep, sw_costs, false);
  auto* ratios = sweep->add_option("--ratios", sw_ratios, "c_p/c_c ratios (c_p held fixed)")->delimiter(',');
  auto* ccs = sweep->add_option("--cc-values", sw_ccs, "Corrective costs (c_p held fixed)")->delimiter(',');
  ratios->excludes(ccs);
  sweep->add_option("--policies", sw_policies,
                    "heuristic, heuristic-opt, renewal, opportunity, ordering, ordering-opt")
      ->delimiter(',')
      ->check(CLI::IsMember({"heuristic", "heuristic-opt", "renewal", "opportunity", "ordering", "ordering-opt"}))
      ->capture_default_str();
  sweep->add_option("--rbar-option", sw_rbar_option)->check(CLI::Range(1, 3))->capture_default_str();
  add_grid_options(sweep, sw_grid, "");
  sweep->add_option("--out", sw_out, "Output sweep table (CSV)")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim_config, sim_traces, sim_truths, out, err);

    if (evaluate->parsed()) {
      const CostModel costs = make_costs(ev_costs);
      LoadedFleet fleet = load_fleet(ev_fleet, err);
      io::Report report;
      report.costs = costs;
      report.setting = ev_setting;
      const DecisionPolicy policy =
          make_policy(ev_policy, ev_setting, costs, fleet.truths, report.parameters, evaluate);
      report.policy = policy_label(policy);
      const PerfectMode mode = ev_allow_failure ? PerfectMode::AllowFailure : PerfectMode::AlwaysPreventive;
      report.evaluation = evaluate_fleet(fleet.traces, fleet.truths, fleet.grid, costs, policy, mode);
      if (ev_ci == "bootstrap") {
        report.evaluation.ci95_m = bootstrap_ci_m(report.evaluation.outcomes, report.evaluation.perfect_outcomes,
                                                  ev_resamples, ev_seed);
        report.parameters["bootstrap_resamples"] = ev_resamples;
      }
      warn_evaluation(err, report.evaluation);
      print_evaluation(out, report.evaluation);
      if (!ev_report.empty()) io::write_report(report, ev_report);
      return kSuccess;
    }

    if (optimize->parsed()) {
      const CostModel costs = make_costs(op_costs);
      if (!(op_split > 0.0)) throw ConfigError("--split must be > 0");
      LoadedFleet fleet = load_fleet(op_fleet, err);
      const auto train = subset(fleet.truths, op_split, true);
      const auto held_out = subset(fleet.truths, op_split, false);
      const auto& eval_truths = op_split < 1.0 ? held_out : train;
      err << "training on " << train.size() << " units, evaluating on " << eval_truths.size() << '\n';
      if (eval_truths.empty()) throw InputError("the split leaves no units for evaluation");

      io::Report report;
      report.costs = costs;
      // c_p/c_c is always a candidate so the optimum is never worse than the default.
      const std::array<double, 1> ratio{costs.c_p / costs.c_c};
      DecisionPolicy policy;
      if (op_family == "heuristic") {
        const ThresholdGrid grid = make_grid(op_grid, optimize->count("--thresholds") > 0).with(ratio);
        const ThresholdOptimum best = optimize_heuristic_threshold(fleet.traces, train, fleet.grid, costs, grid);
        report.parameters["p_thres"] = best.p_thres;
        report.parameters["m_hat_train"] = best.m_hat;
        out << std::setprecision(10) << "p_thres " << best.p_thres << "\nm_hat_train " << best.m_hat << '\n';
        policy = HeuristicThreshold{best.p_thres};
        report.setting = "replacement";
      } else {
        // Per-axis grids fall back to the shared grid when not given.
        const ThresholdGrid base = make_grid(op_grid, optimize->count("--thresholds") > 0);
        const auto axis = [&](const GridArgs& g, const std::string& prefix) {
          const bool list = optimize->count("--" + prefix + "thresholds") > 0;
          const bool range = optimize->count("--" + prefix + "grid-start") || optimize->count("--" + prefix + "grid-stop") ||
                             optimize->count("--" + prefix + "grid-step");
          return list || range ? make_grid(g, list) : base;
        };
        const ThresholdGrid og = axis(op_order_grid, "order-").with(ratio);
        const ThresholdGrid rg = axis(op_rep_grid, "rep-").with(ratio);
        const OrderingOptimum best = optimize_ordering_thresholds(fleet.traces, train, fleet.grid, costs, og, rg);
        report.parameters["p_order_thres"] = best.p_order_thres;
        report.parameters["p_rep_thres"] = best.p_rep_thres;
        report.parameters["m_hat_train"] = best.m_hat;
        out << std::setprecision(10) << "p_order_thres " << best.p_order_thres << "\np_rep_thres "
            << best.p_rep_thres << "\nm_hat_train " << best.m_hat << '\n';
        policy = OrderingThresholds{best.p_order_thres, best.p_rep_thres};
        report.setting = "ordering";
      }
      report.parameters["split"] = op_split;
      report.policy = policy_label(policy);
      report.evaluation = evaluate_fleet(fleet.traces, eval_truths, fleet.grid, costs, policy);
      warn_evaluation(err, report.evaluation);
      out << "m_hat_eval " << report.evaluation.m_hat << '\n';
      if (!op_report.empty()) io::write_report(report, op_report);
      return kSuccess;
    }

    if (sweep->parsed()) {
      if (sw_ratios.empty() && sw_ccs.empty()) throw ConfigError("give --ratios or --cc-values");
      CostModel base = sw_costs.file.empty()
                           ? CostModel{sw_costs.c_p, 2.0 * sw_costs.c_p, sw_costs.c_unav, sw_costs.c_inv,
                                       sw_costs.lead_time}
                           : io::read_cost_model(sw_costs.file);
      std::vector<double> ccs;
      std::vector<double> ratio_col;
      if (!sw_ratios.empty()) {
        ratio_col = dedupe(sw_ratios, "ratio", err);
        for (double r : ratio_col) {
          if (!(r > 0.0 && r < 1.0)) throw ConfigError("cost ratios must lie in (0, 1)");
          ccs.push_back(base.c_p / r);
        }
      } else {
        ccs = dedupe(sw_ccs, "c_c", err);
        for (double c : ccs) ratio_col.push_back(base.c_p / c);
      }
      const std::vector<std::string> policies = [&] {
        std::vector<std::string> p;
        std::set<std::string> seen;
        for (const auto& s : sw_policies)
          if (seen.insert(s).second) p.push_back(s);
        return p;
      }();
      const ThresholdGrid grid = make_grid(sw_grid, sweep->count("--thresholds") > 0);
      LoadedFleet fleet = load_fleet(sw_fleet, err);
      std::vector<io::SweepRow> rows;
      for (std::size_t ci = 0; ci < ccs.size(); ++ci) {
        CostModel costs = base;
        costs.c_c = ccs[ci];
        try {
          costs.validate();
        } catch (const DomainError& e) {
          throw ConfigError(e.what());
        }
        const double ratio = ratio_col[ci];
        const std::array<double, 1> default_p{costs.c_p / costs.c_c};
        const ThresholdGrid opt_grid = grid.with(default_p);
        for (const auto& name : policies) {
          DecisionPolicy policy;
          if (name == "heuristic") {
            policy = HeuristicThreshold{costs.c_p / costs.c_c};
          } else if (name == "heuristic-opt") {
            policy = HeuristicThreshold{
                optimize_heuristic_threshold(fleet.traces, fleet.truths, fleet.grid, costs, opt_grid).p_thres};
          } else if (name == "renewal") {
            policy = RenewalObjective{};
          } else if (name == "opportunity") {
            policy = OpportunityLossObjective{rbar_estimate(fit_population_ttf(fleet.truths), costs,
                                                            static_cast<RbarOption>(sw_rbar_option))};
          } else if (name == "ordering") {
            policy = OrderingThresholds{costs.c_p / costs.c_c, costs.c_p / costs.c_c};
          } else {
            const auto best = optimize_ordering_thresholds(fleet.traces, fleet.truths, fleet.grid, costs, opt_grid, opt_grid);
            policy = OrderingThresholds{best.p_order_thres, best.p_rep_thres};
          }
          const FleetEvaluation ev = evaluate_fleet(fleet.traces, fleet.truths, fleet.grid, costs, policy);
          warn_evaluation(err, ev);
          const Interval ci95 = ev.ci95_m.value_or(Interval{ev.m_hat, ev.m_hat});
          rows.push_back({ratio, name, ev.m_hat, ci95.lo, ci95.hi});
          err << "ratio " << ratio << ' ' << name << " m_hat " << ev.m_hat << '\n';
        }
      }
      io::write_sweep(rows, sw_out);
      out << "rows " << rows.size() << '\n';
      return kSuccess;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace pdm::cli
