#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pdm/evaluation.hpp"
#include "pdm/io.hpp"
#include "pdm/optimize.hpp"
#include "pdm/simulator.hpp"

namespace py = pybind11;
using namespace pdm;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Prognostics-to-maintenance evaluation core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  auto input = py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DegenerateFitError>(m, "DegenerateFitError", input.ptr());
  py::register_exception<InfeasiblePerfectError>(m, "InfeasiblePerfectError", input.ptr());

  py::class_<TimeGrid>(m, "TimeGrid")
      .def(py::init<double, int>(), py::arg("delta_t"), py::arg("max_steps"))
      .def_readonly("delta_t", &TimeGrid::delta_t)
      .def_readonly("max_steps", &TimeGrid::max_steps)
      .def("time", &TimeGrid::time)
      .def("last_step_before", &TimeGrid::last_step_before);

  py::class_<CostModel>(m, "CostModel")
      .def(py::init([](double c_p, double c_c, double c_unav, double c_inv, double lead_time) {
             CostModel c{c_p, c_c, c_unav, c_inv, lead_time};
             c.validate();
             return c;
           }),
           py::arg("c_p") = 1.0, py::arg("c_c") = 10.0, py::arg("c_unav") = 0.0,
           py::arg("c_inv") = 0.0, py::arg("lead_time") = 0.0)
      .def_readwrite("c_p", &CostModel::c_p)
      .def_readwrite("c_c", &CostModel::c_c)
      .def_readwrite("c_unav", &CostModel::c_unav)
      .def_readwrite("c_inv", &CostModel::c_inv)
      .def_readwrite("lead_time", &CostModel::lead_time);

  py::class_<Lognormal>(m, "Lognormal")
      .def(py::init([](double mu, double sigma) { return Lognormal{mu, sigma}; }), py::arg("mu"),
           py::arg("sigma"))
      .def_readonly("mu", &Lognormal::mu)
      .def_readonly("sigma", &Lognormal::sigma)
      .def("__repr__", [](const Lognormal& d) {
        return "Lognormal(mu=" + io::format_number(d.mu) + ", sigma=" + io::format_number(d.sigma) + ")";
      });
  py::class_<PointMass>(m, "PointMass")
      .def(py::init([](double v) { return PointMass{v}; }), py::arg("value"))
      .def_readonly("value", &PointMass::value);
  py::class_<WeightedSamples>(m, "WeightedSamples")
      .def(py::init([](std::vector<double> v, std::vector<double> w) {
             return WeightedSamples{std::move(v), std::move(w)};
           }),
           py::arg("values"), py::arg("weights"))
      .def_readonly("values", &WeightedSamples::values)
      .def_readonly("weights", &WeightedSamples::weights);
  py::class_<CdfPoints>(m, "CdfPoints")
      .def(py::init([](const std::vector<std::pair<double, double>>& pts) {
             CdfPoints c;
             for (auto [t, p] : pts) c.points.push_back({t, p});
             return c;
           }),
           py::arg("points"))
      .def_property_readonly("points", [](const CdfPoints& c) {
        std::vector<std::pair<double, double>> out;
        for (const auto& p : c.points) out.emplace_back(p.threshold, p.prob);
        return out;
      });

  auto checked = [](const RulDistribution& d) {
    validate(d);
    return d;
  };
  m.def("prob_rul_leq", [=](const RulDistribution& d, double x) { return prob_rul_leq(checked(d), x); },
        py::arg("dist"), py::arg("x"));
  m.def("truncated_mean_below",
        [=](const RulDistribution& d, double t) { return truncated_mean_below(checked(d), t); },
        py::arg("dist"), py::arg("T"));
  m.def("expected_exceedance",
        [=](const RulDistribution& d, double t) { return expected_exceedance(checked(d), t); },
        py::arg("dist"), py::arg("T"));
  m.def("mean", [=](const RulDistribution& d) { return mean(checked(d)); }, py::arg("dist"));
  m.def("quantile", [=](const RulDistribution& d, double p) { return quantile(checked(d), p); },
        py::arg("dist"), py::arg("p"));
  m.def("fit_lognormal_from_two_cdf_points", &fit_lognormal_from_two_cdf_points, py::arg("a"),
        py::arg("p_a"), py::arg("b"), py::arg("p_b"));

  py::class_<TraceEntry>(m, "TraceEntry")
      .def(py::init([](double t, RulDistribution d) { return TraceEntry{t, std::move(d)}; }),
           py::arg("t"), py::arg("dist"))
      .def_readonly("t", &TraceEntry::t)
      .def_readonly("dist", &TraceEntry::dist);
  py::class_<PredictionTrace>(m, "PredictionTrace")
      .def(py::init([](std::string id, std::vector<TraceEntry> e) {
             return PredictionTrace{std::move(id), std::move(e)};
           }),
           py::arg("unit_id"), py::arg("entries"))
      .def_readonly("unit_id", &PredictionTrace::unit_id)
      .def_readonly("entries", &PredictionTrace::entries);
  py::class_<UnitTruth>(m, "UnitTruth")
      .def(py::init([](std::string id, double tf) { return UnitTruth{std::move(id), tf}; }),
           py::arg("unit_id"), py::arg("failure_time"))
      .def_readonly("unit_id", &UnitTruth::unit_id)
      .def_readonly("failure_time", &UnitTruth::failure_time);

  py::enum_<ReplacementKind>(m, "ReplacementKind")
      .value("Preventive", ReplacementKind::Preventive)
      .value("Corrective", ReplacementKind::Corrective);
  py::class_<LifecycleOutcome>(m, "LifecycleOutcome")
      .def_readonly("unit_id", &LifecycleOutcome::unit_id)
      .def_readonly("t_lc", &LifecycleOutcome::t_lc)
      .def_readonly("kind", &LifecycleOutcome::kind)
      .def_readonly("c_rep", &LifecycleOutcome::c_rep)
      .def_readonly("t_order", &LifecycleOutcome::t_order)
      .def_readonly("c_delay", &LifecycleOutcome::c_delay)
      .def_readonly("c_stock", &LifecycleOutcome::c_stock)
      .def_readonly("c_m", &LifecycleOutcome::c_m);

  py::class_<SimulatorConfig>(m, "SimulatorConfig")
      .def(py::init([](double mu_tf, double sigma_tf, double delta_t, int max_steps, double sigma_ln_eps,
                       double corr_length, int n_units, std::uint64_t seed) {
             SimulatorConfig c{mu_tf, sigma_tf, TimeGrid(delta_t, max_steps), sigma_ln_eps, corr_length,
                               n_units, seed};
             c.validate();
             return c;
           }),
           py::arg("mu_tf") = 225.0, py::arg("sigma_tf") = 40.0, py::arg("delta_t") = 10.0,
           py::arg("max_steps") = 100, py::arg("sigma_ln_eps") = 0.4, py::arg("corr_length") = 50.0,
           py::arg("n_units") = 2000, py::arg("seed") = 0)
      .def_readonly("mu_tf", &SimulatorConfig::mu_tf)
      .def_readonly("sigma_tf", &SimulatorConfig::sigma_tf)
      .def_readonly("grid", &SimulatorConfig::grid)
      .def_readonly("sigma_ln_eps", &SimulatorConfig::sigma_ln_eps)
      .def_readonly("corr_length", &SimulatorConfig::corr_length)
      .def_readonly("n_units", &SimulatorConfig::n_units)
      .def_readonly("seed", &SimulatorConfig::seed);

  m.def(
      "exponential_correlation_matrix",
      [](const std::vector<double>& times, double l) {
        const Eigen::MatrixXd r = exponential_correlation_matrix(times, l);
        std::vector<std::vector<double>> out(r.rows(), std::vector<double>(r.cols()));
        for (Eigen::Index i = 0; i < r.rows(); ++i)
          for (Eigen::Index j = 0; j < r.cols(); ++j) out[i][j] = r(i, j);
        return out;
      },
      py::arg("times"), py::arg("corr_length"));
  m.def(
      "sample_fleet",
      [](const SimulatorConfig& c) {
        Fleet f = sample_fleet(c);
        return py::make_tuple(f.truths, f.traces);
      },
      py::arg("config"), "Returns (truths, traces).");
  m.def(
      "point_mass_traces",
      [](const std::vector<UnitTruth>& truths, const TimeGrid& grid) { return point_mass_traces(truths, grid); },
      py::arg("truths"), py::arg("grid"));

  py::class_<HeuristicThreshold>(m, "HeuristicThreshold")
      .def(py::init([](double p) {
             HeuristicThreshold h{p};
             h.validate();
             return h;
           }),
           py::arg("p_thres"))
      .def_readonly("p_thres", &HeuristicThreshold::p_thres);
  py::class_<RenewalObjective>(m, "RenewalObjective").def(py::init<>());
  py::class_<OpportunityLossObjective>(m, "OpportunityLossObjective")
      .def(py::init([](double r) { return OpportunityLossObjective{r}; }), py::arg("r_bar"))
      .def_readonly("r_bar", &OpportunityLossObjective::r_bar);
  py::class_<OrderingThresholds>(m, "OrderingThresholds")
      .def(py::init([](double po, double pr) {
             OrderingThresholds o{po, pr};
             o.validate();
             return o;
           }),
           py::arg("p_order_thres"), py::arg("p_rep_thres"))
      .def_readonly("p_order_thres", &OrderingThresholds::p_order_thres)
      .def_readonly("p_rep_thres", &OrderingThresholds::p_rep_thres);

  py::enum_<RbarOption>(m, "RbarOption")
      .value("UpperBoundRenewal", RbarOption::UpperBoundRenewal)
      .value("LowerBoundPerfect", RbarOption::LowerBoundPerfect)
      .value("AverageOfBounds", RbarOption::AverageOfBounds);
  py::enum_<PerfectMode>(m, "PerfectMode")
      .value("AlwaysPreventive", PerfectMode::AlwaysPreventive)
      .value("AllowFailure", PerfectMode::AllowFailure);

  py::class_<PopulationTtf>(m, "PopulationTtf")
      .def(py::init([](double mu, double sigma) {
             PopulationTtf p{mu, sigma};
             p.validate();
             return p;
           }),
           py::arg("mu"), py::arg("sigma"))
      .def_readonly("mu", &PopulationTtf::mu)
      .def_readonly("sigma", &PopulationTtf::sigma)
      .def("mean", &PopulationTtf::mean);
  m.def(
      "fit_population_ttf", [](const std::vector<UnitTruth>& t) { return fit_population_ttf(t); },
      py::arg("truths"));
  m.def("rbar_estimate", &rbar_estimate, py::arg("pop"), py::arg("costs"), py::arg("option"));
  m.def("renewal_objective", &renewal_objective, py::arg("t_replace"), py::arg("t_k"), py::arg("dist"),
        py::arg("costs"));
  m.def("opportunity_loss_objective", &opportunity_loss_objective, py::arg("t_replace"), py::arg("t_k"),
        py::arg("dist"), py::arg("costs"), py::arg("r_bar"));

  py::class_<ReplacementOptimum>(m, "ReplacementOptimum")
      .def_readonly("t_replace", &ReplacementOptimum::t_replace)
      .def_readonly("value", &ReplacementOptimum::value);
  m.def("optimal_replacement_time", &optimal_replacement_time, py::arg("t_k"), py::arg("dist"),
        py::arg("costs"), py::arg("objective"));
  m.def("lead_window", &lead_window, py::arg("lead_time"), py::arg("delta_t"));

  m.def("run_replacement_policy", &run_replacement_policy, py::arg("trace"), py::arg("truth"),
        py::arg("grid"), py::arg("costs"), py::arg("policy"));
  m.def("run_ordering_policy", &run_ordering_policy, py::arg("trace"), py::arg("truth"), py::arg("grid"),
        py::arg("costs"), py::arg("params"));
  m.def("perfect_outcome_replacement", &perfect_outcome_replacement, py::arg("truth"), py::arg("grid"),
        py::arg("costs"), py::arg("mode") = PerfectMode::AlwaysPreventive);
  m.def("perfect_outcome_ordering", &perfect_outcome_ordering, py::arg("truth"), py::arg("grid"),
        py::arg("costs"));

  m.def(
      "renewal_ratio", [](const std::vector<LifecycleOutcome>& o) { return renewal_ratio(o); },
      py::arg("outcomes"));
  m.def(
      "renewal_ratio_variance",
      [](const std::vector<LifecycleOutcome>& o) { return renewal_ratio_variance(o).value; },
      py::arg("outcomes"));

  py::class_<Interval>(m, "Interval").def_readonly("lo", &Interval::lo).def_readonly("hi", &Interval::hi);
  py::class_<FleetEvaluation>(m, "FleetEvaluation")
      .def_readonly("r_hat", &FleetEvaluation::r_hat)
      .def_readonly("var_r_hat", &FleetEvaluation::var_r_hat)
      .def_readonly("r_perfect", &FleetEvaluation::r_perfect)
      .def_readonly("m_hat", &FleetEvaluation::m_hat)
      .def_readonly("var_m_hat", &FleetEvaluation::var_m_hat)
      .def_readonly("ci95_m", &FleetEvaluation::ci95_m)
      .def_readonly("variance_clamped", &FleetEvaluation::variance_clamped)
      .def_readonly("n_units", &FleetEvaluation::n_units)
      .def_readonly("outcomes", &FleetEvaluation::outcomes)
      .def_readonly("perfect_outcomes", &FleetEvaluation::perfect_outcomes)
      .def_readonly("excluded_units", &FleetEvaluation::excluded_units);
  m.def("metric", &metric, py::arg("outcomes"), py::arg("perfect_outcomes"));
  m.def(
      "evaluate_fleet",
      [](const std::vector<PredictionTrace>& traces, const std::vector<UnitTruth>& truths, const TimeGrid& grid,
         const CostModel& costs, const DecisionPolicy& policy, PerfectMode mode) {
        py::gil_scoped_release release;
        return evaluate_fleet(traces, truths, grid, costs, policy, mode);
      },
      py::arg("traces"), py::arg("truths"), py::arg("grid"), py::arg("costs"), py::arg("policy"),
      py::arg("mode") = PerfectMode::AlwaysPreventive);

  py::class_<ThresholdGrid>(m, "ThresholdGrid")
      .def(py::init([](std::vector<double> v) {
             ThresholdGrid g{std::move(v)};
             g.validate();
             return g;
           }),
           py::arg("values"))
      .def_static("uniform", &ThresholdGrid::uniform, py::arg("start"), py::arg("stop"), py::arg("step"))
      .def_static("standard", &ThresholdGrid::standard)
      .def("with_points", [](const ThresholdGrid& g, const std::vector<double>& x) { return g.with(x); })
      .def_readonly("values", &ThresholdGrid::values);
  py::class_<ThresholdOptimum>(m, "ThresholdOptimum")
      .def_readonly("p_thres", &ThresholdOptimum::p_thres)
      .def_readonly("m_hat", &ThresholdOptimum::m_hat)
      .def_readonly("m_hat_by_threshold", &ThresholdOptimum::m_hat_by_threshold);
  py::class_<OrderingOptimum>(m, "OrderingOptimum")
      .def_readonly("p_order_thres", &OrderingOptimum::p_order_thres)
      .def_readonly("p_rep_thres", &OrderingOptimum::p_rep_thres)
      .def_readonly("m_hat", &OrderingOptimum::m_hat);
  m.def(
      "optimize_heuristic_threshold",
      [](const std::vector<PredictionTrace>& traces, const std::vector<UnitTruth>& truths, const TimeGrid& grid,
         const CostModel& costs, const ThresholdGrid& thresholds, PerfectMode mode) {
        py::gil_scoped_release release;
        return optimize_heuristic_threshold(traces, truths, grid, costs, thresholds, mode);
      },
      py::arg("traces"), py::arg("truths"), py::arg("grid"), py::arg("costs"), py::arg("thresholds"),
      py::arg("mode") = PerfectMode::AlwaysPreventive);
  m.def(
      "optimize_ordering_thresholds",
      [](const std::vector<PredictionTrace>& traces, const std::vector<UnitTruth>& truths, const TimeGrid& grid,
         const CostModel& costs, const ThresholdGrid& order_grid, const ThresholdGrid& rep_grid) {
        py::gil_scoped_release release;
        return optimize_ordering_thresholds(traces, truths, grid, costs, order_grid, rep_grid);
      },
      py::arg("traces"), py::arg("truths"), py::arg("grid"), py::arg("costs"), py::arg("order_grid"),
      py::arg("rep_grid"));

  m.def("read_traces", &io::read_traces, py::arg("path"));
  m.def(
      "write_traces",
      [](const std::vector<PredictionTrace>& t, const std::filesystem::path& p) { io::write_traces(t, p); },
      py::arg("traces"), py::arg("path"));
  m.def("read_truths", &io::read_truths, py::arg("path"));
  m.def(
      "write_truths",
      [](const std::vector<UnitTruth>& t, const std::filesystem::path& p) { io::write_truths(t, p); },
      py::arg("truths"), py::arg("path"));
}
