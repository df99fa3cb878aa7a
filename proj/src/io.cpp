#include "pdm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace pdm::io {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double finite_number(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw InputError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw InputError(std::string("field '") + key + "' must be finite");
  return v;
}

std::vector<double> number_array(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw InputError(std::string("field '") + key + "' must be an array");
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_number()) throw InputError(std::string("field '") + key + "' must contain numbers");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw InputError(std::string("field '") + key + "' must be finite");
    out.push_back(x);
  }
  return out;
}

RulDistribution dist_from_json(const json& d) {
  if (!d.is_object()) throw InputError("field 'dist' must be an object");
  const auto kind_it = d.find("kind");
  if (kind_it == d.end() || !kind_it->is_string()) throw InputError("dist.kind must be a string");
  const std::string kind = kind_it->get<std::string>();
  RulDistribution dist;
  if (kind == "lognormal") {
    dist = Lognormal{finite_number(d, "mu"), finite_number(d, "sigma")};
  } else if (kind == "point_mass") {
    dist = PointMass{finite_number(d, "value")};
  } else if (kind == "weighted_samples") {
    dist = WeightedSamples{number_array(d, "values"), number_array(d, "weights")};
  } else if (kind == "cdf_points") {
    const auto it = d.find("points");
    if (it == d.end() || !it->is_array()) throw InputError("field 'points' must be an array");
    CdfPoints pts;
    for (const auto& p : *it) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
        throw InputError("cdf points must be [threshold, prob] pairs");
      const double th = p[0].get<double>();
      const double pr = p[1].get<double>();
      if (!std::isfinite(th) || !std::isfinite(pr)) throw InputError("cdf points must be finite");
      pts.points.push_back({th, pr});
    }
    dist = std::move(pts);
  } else {
    throw InputError("unknown dist kind '" + kind + "'");
  }
  try {
    validate(dist);
  } catch (const DomainError& e) {
    throw InputError(e.what());
  }
  return dist;
}

ordered_json dist_to_json(const RulDistribution& dist) {
  ordered_json d;
  d["kind"] = kind_name(dist);
  std::visit(overloaded{
                 [&](const Lognormal& x) {
                   d["mu"] = x.mu;
                   d["sigma"] = x.sigma;
                 },
                 [&](const PointMass& x) { d["value"] = x.value; },
                 [&](const WeightedSamples& x) {
                   d["values"] = x.values;
                   d["weights"] = x.weights;
                 },
                 [&](const CdfPoints& x) {
                   ordered_json pts = ordered_json::array();
                   for (const auto& p : x.points) pts.push_back({p.threshold, p.prob});
                   d["points"] = std::move(pts);
                 },
             },
             dist);
  return d;
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e) throw InputError(where + ": not a number: '" + s + "'");
  if (!std::isfinite(v)) throw InputError(where + ": number must be finite");
  return v;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> read_optional(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_number()) throw InputError(std::string("field '") + key + "' must be a number");
  return it->get<double>();
}

ordered_json outcome_to_json(const LifecycleOutcome& o) {
  ordered_json j;
  j["unit_id"] = o.unit_id;
  j["t_lc"] = o.t_lc;
  j["kind"] = o.kind == ReplacementKind::Preventive ? "preventive" : "corrective";
  j["c_rep"] = o.c_rep;
  j["t_order"] = o.t_order ? ordered_json(*o.t_order) : ordered_json(nullptr);
  j["c_delay"] = o.c_delay;
  j["c_stock"] = o.c_stock;
  j["c_m"] = o.c_m;
  return j;
}

LifecycleOutcome outcome_from_json(const json& j) {
  LifecycleOutcome o;
  o.unit_id = j.at("unit_id").get<std::string>();
  o.t_lc = finite_number(j, "t_lc");
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "preventive" && kind != "corrective") throw InputError("unknown replacement kind " + kind);
  o.kind = kind == "preventive" ? ReplacementKind::Preventive : ReplacementKind::Corrective;
  o.c_rep = finite_number(j, "c_rep");
  o.t_order = read_optional(j, "t_order");
  o.c_delay = finite_number(j, "c_delay");
  o.c_stock = finite_number(j, "c_stock");
  o.c_m = finite_number(j, "c_m");
  return o;
}

ordered_json costs_to_json(const CostModel& c) {
  ordered_json j;
  j["c_p"] = c.c_p;
  j["c_c"] = c.c_c;
  j["c_unav"] = c.c_unav;
  j["c_inv"] = c.c_inv;
  j["lead_time"] = c.lead_time;
  return j;
}

CostModel costs_from_json(const json& j) {
  static const std::unordered_set<std::string> known{"c_p", "c_c", "c_unav", "c_inv", "lead_time"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown cost field '" + k + "'");
  CostModel c;
  c.c_p = finite_number(j, "c_p");
  c.c_c = finite_number(j, "c_c");
  if (j.contains("c_unav")) c.c_unav = finite_number(j, "c_unav");
  if (j.contains("c_inv")) c.c_inv = finite_number(j, "c_inv");
  if (j.contains("lead_time")) c.lead_time = finite_number(j, "lead_time");
  return c;
}

json parse_json_document(std::istream& in, const char* what) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    out << contents;
    out.flush();
    if (!out) throw InputError("cannot write " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw InputError("cannot write " + path.string());
  }
}

std::vector<PredictionTrace> parse_traces(std::istream& in) {
  std::vector<PredictionTrace> traces;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    try {
      const json rec = json::parse(line);
      if (!rec.is_object()) throw InputError("record must be an object");
      const auto id_it = rec.find("unit_id");
      if (id_it == rec.end() || !id_it->is_string()) throw InputError("unit_id must be a string");
      const std::string id = id_it->get<std::string>();
      const double t = finite_number(rec, "t");
      const auto d_it = rec.find("dist");
      if (d_it == rec.end()) throw InputError("missing field 'dist'");
      RulDistribution dist = dist_from_json(*d_it);
      auto [it, inserted] = index.emplace(id, traces.size());
      if (inserted) traces.push_back(PredictionTrace{id, {}});
      traces[it->second].entries.push_back({t, std::move(dist)});
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError(where + ": " + e.what());
    }
  }
  for (auto& trace : traces) {
    std::stable_sort(trace.entries.begin(), trace.entries.end(),
                     [](const TraceEntry& a, const TraceEntry& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < trace.entries.size(); ++i)
      if (trace.entries[i].t == trace.entries[i - 1].t)
        throw InputError("duplicate record for unit " + trace.unit_id + " at t = " +
                         format_number(trace.entries[i].t));
  }
  return traces;
}

void format_traces(std::ostream& out, std::span<const PredictionTrace> traces) {
  for (const auto& trace : traces) {
    for (const auto& e : trace.entries) {
      ordered_json rec;
      rec["unit_id"] = trace.unit_id;
      rec["t"] = e.t;
      rec["dist"] = dist_to_json(e.dist);
      out << rec.dump() << '\n';
    }
  }
}

std::vector<PredictionTrace> read_traces(const std::filesystem::path& path) {
  std::istringstream in(read_all(path));
  return parse_traces(in);
}

void write_traces(std::span<const PredictionTrace> traces, const std::filesystem::path& path) {
  std::ostringstream out;
  format_traces(out, traces);
  write_file_atomic(path, out.str());
}

std::vector<UnitTruth> parse_truths(std::istream& in) {
  std::string line;
  int line_no = 0;
  bool header = false;
  std::vector<UnitTruth> truths;
  std::unordered_set<std::string> ids;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!header) {
      if (line != "unit_id,failure_time") throw InputError(where + ": expected header 'unit_id,failure_time'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw InputError(where + ": expected two fields");
    UnitTruth t{trim(line.substr(0, comma)), parse_double(trim(line.substr(comma + 1)), where)};
    if (t.unit_id.empty()) throw InputError(where + ": empty unit_id");
    if (!(t.failure_time > 0.0)) throw InputError(where + ": failure_time must be > 0");
    if (!ids.insert(t.unit_id).second) throw InputError(where + ": duplicate unit_id " + t.unit_id);
    truths.push_back(std::move(t));
  }
  return truths;
}

void format_truths(std::ostream& out, std::span<const UnitTruth> truths) {
  out << "unit_id,failure_time\n";
  for (const auto& t : truths) {
    if (t.unit_id.find_first_of(",\r\n") != std::string::npos)
      throw InputError("unit_id '" + t.unit_id + "' cannot be written to CSV");
    out << t.unit_id << ',' << format_number(t.failure_time) << '\n';
  }
}

std::vector<UnitTruth> read_truths(const std::filesystem::path& path) {
  std::istringstream in(read_all(path));
  return parse_truths(in);
}

void write_truths(std::span<const UnitTruth> truths, const std::filesystem::path& path) {
  std::ostringstream out;
  format_truths(out, truths);
  write_file_atomic(path, out.str());
}

SimulatorConfig parse_simulator_config(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("simulator config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("simulator config must be an object");
  static const std::unordered_set<std::string> known{"mu_tf",        "sigma_tf",    "delta_t",
                                                     "max_steps",    "sigma_ln_eps", "corr_length",
                                                     "n_units",      "seed"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw ConfigError("unknown simulator config field '" + k + "'");
  SimulatorConfig c;
  try {
    const auto num = [&](const char* key, double& dst) {
      if (j.contains(key)) dst = finite_number(j, key);
    };
    num("mu_tf", c.mu_tf);
    num("sigma_tf", c.sigma_tf);
    num("sigma_ln_eps", c.sigma_ln_eps);
    num("corr_length", c.corr_length);
    double delta_t = c.grid.delta_t;
    num("delta_t", delta_t);
    int max_steps = c.grid.max_steps;
    if (j.contains("max_steps")) max_steps = j.at("max_steps").get<int>();
    if (j.contains("n_units")) c.n_units = j.at("n_units").get<int>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    c.grid = TimeGrid(delta_t, max_steps);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("simulator config: ") + e.what());
  } catch (const InputError& e) {
    throw ConfigError(std::string("simulator config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("simulator config: ") + e.what());
  }
  c.validate();
  return c;
}

void format_simulator_config(std::ostream& out, const SimulatorConfig& c) {
  ordered_json j;
  j["mu_tf"] = c.mu_tf;
  j["sigma_tf"] = c.sigma_tf;
  j["delta_t"] = c.grid.delta_t;
  j["max_steps"] = c.grid.max_steps;
  j["sigma_ln_eps"] = c.sigma_ln_eps;
  j["corr_length"] = c.corr_length;
  j["n_units"] = c.n_units;
  j["seed"] = c.seed;
  out << j.dump(2) << '\n';
}

SimulatorConfig read_simulator_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_simulator_config(in);
}

void write_simulator_config(const SimulatorConfig& config, const std::filesystem::path& path) {
  std::ostringstream out;
  format_simulator_config(out, config);
  write_file_atomic(path, out.str());
}

CostModel parse_cost_model(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("cost model: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("cost model must be an object");
  try {
    CostModel c = costs_from_json(j);
    c.validate();
    return c;
  } catch (const InputError& e) {
    throw ConfigError(std::string("cost model: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("cost model: ") + e.what());
  }
}

CostModel read_cost_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return parse_cost_model(in);
}

void format_report(std::ostream& out, const Report& r) {
  const FleetEvaluation& ev = r.evaluation;
  ordered_json j;
  j["setting"] = r.setting;
  j["policy"] = r.policy;
  j["costs"] = costs_to_json(r.costs);
  j["parameters"] = ordered_json::object();
  for (const auto& [k, v] : r.parameters) j["parameters"][k] = v;
  j["n_units"] = ev.n_units;
  j["r_hat"] = ev.r_hat;
  j["var_r_hat"] = optional_number(ev.var_r_hat);
  j["r_perfect"] = ev.r_perfect;
  j["var_r_perfect"] = optional_number(ev.var_r_perfect);
  j["m_hat"] = ev.m_hat;
  j["var_m_hat"] = optional_number(ev.var_m_hat);
  j["ci95_m"] = ev.ci95_m ? ordered_json::array({ev.ci95_m->lo, ev.ci95_m->hi}) : ordered_json(nullptr);
  j["variance_clamped"] = ev.variance_clamped;
  j["excluded_units"] = ev.excluded_units;
  j["outcomes"] = ordered_json::array();
  for (const auto& o : ev.outcomes) j["outcomes"].push_back(outcome_to_json(o));
  j["perfect_outcomes"] = ordered_json::array();
  for (const auto& o : ev.perfect_outcomes) j["perfect_outcomes"].push_back(outcome_to_json(o));
  out << j.dump(2) << '\n';
}

Report parse_report(std::istream& in) {
  const json j = parse_json_document(in, "report");
  try {
    Report r;
    r.setting = j.at("setting").get<std::string>();
    r.policy = j.at("policy").get<std::string>();
    r.costs = costs_from_json(j.at("costs"));
    for (const auto& [k, v] : j.at("parameters").items()) r.parameters[k] = v.get<double>();
    FleetEvaluation& ev = r.evaluation;
    ev.n_units = j.at("n_units").get<std::size_t>();
    ev.r_hat = finite_number(j, "r_hat");
    ev.var_r_hat = read_optional(j, "var_r_hat");
    ev.r_perfect = finite_number(j, "r_perfect");
    ev.var_r_perfect = read_optional(j, "var_r_perfect");
    ev.m_hat = finite_number(j, "m_hat");
    ev.var_m_hat = read_optional(j, "var_m_hat");
    if (const auto& ci = j.at("ci95_m"); !ci.is_null())
      ev.ci95_m = Interval{ci.at(0).get<double>(), ci.at(1).get<double>()};
    ev.variance_clamped = j.at("variance_clamped").get<bool>();
    ev.excluded_units = j.at("excluded_units").get<std::vector<std::string>>();
    for (const auto& o : j.at("outcomes")) ev.outcomes.push_back(outcome_from_json(o));
    for (const auto& o : j.at("perfect_outcomes")) ev.perfect_outcomes.push_back(outcome_from_json(o));
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("report: ") + e.what());
  }
}

void write_report(const Report& report, const std::filesystem::path& path) {
  std::ostringstream out;
  format_report(out, report);
  write_file_atomic(path, out.str());
}

Report read_report(const std::filesystem::path& path) {
  std::istringstream in(read_all(path));
  return parse_report(in);
}

void format_sweep(std::ostream& out, std::span<const SweepRow> rows) {
  out << "cost_ratio,policy,m_hat,ci_lo,ci_hi\n";
  for (const auto& r : rows)
    out << format_number(r.cost_ratio) << ',' << r.policy << ',' << format_number(r.m_hat) << ','
        << format_number(r.ci_lo) << ',' << format_number(r.ci_hi) << '\n';
}

std::vector<SweepRow> parse_sweep(std::istream& in) {
  std::string line;
  int line_no = 0;
  std::vector<SweepRow> rows;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!header) {
      if (line != "cost_ratio,policy,m_hat,ci_lo,ci_hi") throw InputError(where + ": bad sweep header");
      header = true;
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 5) throw InputError(where + ": expected five fields");
    rows.push_back({parse_double(f[0], where), f[1], parse_double(f[2], where), parse_double(f[3], where),
                    parse_double(f[4], where)});
  }
  return rows;
}

void write_sweep(std::span<const SweepRow> rows, const std::filesystem::path& path) {
  std::ostringstream out;
  format_sweep(out, rows);
  write_file_atomic(path, out.str());
}

}  // namespace pdm::io
