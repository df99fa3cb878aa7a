#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pdm/core.hpp"
#include "pdm/evaluation.hpp"
#include "pdm/simulator.hpp"

namespace pdm::io {

// Prediction traces: one JSON object per line,
//   {"unit_id": "...", "t": 10, "dist": {"kind": "lognormal", "mu": 3.1, "sigma": 0.4}}
// Records are grouped by unit_id (first-appearance order) and sorted by t.
std::vector<PredictionTrace> parse_traces(std::istream& in);
void format_traces(std::ostream& out, std::span<const PredictionTrace> traces);
std::vector<PredictionTrace> read_traces(const std::filesystem::path& path);
void write_traces(std::span<const PredictionTrace> traces, const std::filesystem::path& path);

// Unit truths: CSV with header "unit_id,failure_time".
std::vector<UnitTruth> parse_truths(std::istream& in);
void format_truths(std::ostream& out, std::span<const UnitTruth> truths);
std::vector<UnitTruth> read_truths(const std::filesystem::path& path);
void write_truths(std::span<const UnitTruth> truths, const std::filesystem::path& path);

SimulatorConfig parse_simulator_config(std::istream& in);
void format_simulator_config(std::ostream& out, const SimulatorConfig& config);
SimulatorConfig read_simulator_config(const std::filesystem::path& path);
void write_simulator_config(const SimulatorConfig& config, const std::filesystem::path& path);

// Cost model (and optionally grid) for evaluation runs:
//   {"c_p": 100, "c_c": 1000, "c_unav": 10, "c_inv": 1, "lead_time": 20}
CostModel parse_cost_model(std::istream& in);
CostModel read_cost_model(const std::filesystem::path& path);

struct Report {
  std::string setting;  // "replacement" | "ordering"
  std::string policy;
  CostModel costs;
  std::map<std::string, double> parameters;
  FleetEvaluation evaluation;
};

void format_report(std::ostream& out, const Report& report);
Report parse_report(std::istream& in);
void write_report(const Report& report, const std::filesystem::path& path);
Report read_report(const std::filesystem::path& path);

// Sweep table for plotting: cost_ratio,policy,m_hat,ci_lo,ci_hi
struct SweepRow {
  double cost_ratio = 0.0;
  std::string policy;
  double m_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

void format_sweep(std::ostream& out, std::span<const SweepRow> rows);
std::vector<SweepRow> parse_sweep(std::istream& in);
void write_sweep(std::span<const SweepRow> rows, const std::filesystem::path& path);

// Shortest representation that parses back to the same double.
std::string format_number(double x);

// Writes through a temporary sibling file renamed into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace pdm::io
