#include "pdm/simulator.hpp"

#include <cmath>
#include <string>

namespace pdm {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SimulatorConfig::validate() const {
  if (!std::isfinite(mu_tf)) throw ConfigError("mu_tf must be finite");
  if (!(sigma_tf > 0.0) || !std::isfinite(sigma_tf)) throw ConfigError("sigma_tf must be > 0");
  if (!(sigma_ln_eps > 0.0) || !std::isfinite(sigma_ln_eps))
    throw ConfigError("sigma_ln_eps must be > 0");
  if (!(corr_length > 0.0) || !std::isfinite(corr_length))
    throw ConfigError("corr_length must be > 0");
  if (n_units < 1) throw ConfigError("n_units must be >= 1");
  if (!(grid.delta_t > 0.0) || grid.max_steps < 1) throw ConfigError("invalid time grid");
}

Eigen::MatrixXd exponential_correlation_matrix(std::span<const double> times, double l) {
  if (!(l > 0.0)) throw DomainError("correlation length must be > 0");
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      r(i, j) = r(j, i) = std::exp(-std::abs(times[i] - times[j]) / l);
    }
  }
  return r;
}

UnitStream::UnitStream(std::uint64_t seed, std::uint64_t unit_index)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(unit_index + 0x632be59bd9b4e019ULL))) {}

LogErrorSampler::LogErrorSampler(const SimulatorConfig& config, std::span<const double> times) {
  const double s = config.sigma_ln_eps;
  covariance_ = s * s * exponential_correlation_matrix(times, config.corr_length);
  Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
  if (llt.info() != Eigen::Success) {
    const auto n = covariance_.rows();
    const double jitter = 1e-10 * covariance_.trace() / static_cast<double>(n);
    llt.compute(covariance_ + jitter * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() != Eigen::Success)
      throw NumericalError("Cholesky factorization of the log-error covariance failed");
  }
  factor_ = llt.matrixL();
}

std::vector<double> LogErrorSampler::sample(UnitStream& stream, std::size_t prefix) const {
  const auto m = static_cast<Eigen::Index>(std::min(prefix, size()));
  Eigen::VectorXd z(m);
  for (Eigen::Index i = 0; i < m; ++i) z(i) = stream.standard_normal();
  Eigen::VectorXd x = factor_.topLeftCorner(m, m).triangularView<Eigen::Lower>() * z;
  return {x.data(), x.data() + m};
}

std::vector<double> sample_log_error_path(const SimulatorConfig& config,
                                          std::span<const double> times, UnitStream& stream) {
  return LogErrorSampler(config, times).sample(stream);
}

int steps_before_failure(const TimeGrid& grid, double failure_time) {
  return grid.last_step_before(failure_time);
}

PredictionTrace build_trace(const SimulatorConfig& config, const std::string& unit_id,
                            double failure_time, std::span<const double> log_errors) {
  const int n = steps_before_failure(config.grid, failure_time);
  if (static_cast<std::size_t>(n) > log_errors.size())
    throw DomainError("build_trace: not enough log-errors for the trace length");
  PredictionTrace trace{unit_id, {}};
  trace.entries.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    const double t = config.grid.time(k);
    const double mu = std::log(failure_time - t) + log_errors[static_cast<std::size_t>(k - 1)];
    trace.entries.push_back({t, Lognormal{mu, config.sigma_ln_eps}});
  }
  return trace;
}

double draw_failure_time(const SimulatorConfig& config, UnitStream& stream) {
  double tf = 0.0;
  do {
    tf = config.mu_tf + config.sigma_tf * stream.standard_normal();
  } while (!(tf > config.grid.delta_t));
  return tf;
}

SimulatedUnit generate_unit(const SimulatorConfig& config, const LogErrorSampler& sampler,
                            const std::string& unit_id, UnitStream& stream) {
  const double tf = draw_failure_time(config, stream);
  const auto n = static_cast<std::size_t>(steps_before_failure(config.grid, tf));
  const std::vector<double> eps = sampler.sample(stream, n);
  return {UnitTruth{unit_id, tf}, build_trace(config, unit_id, tf, eps)};
}

SimulatedUnit generate_unit(const SimulatorConfig& config, const std::string& unit_id,
                            UnitStream& stream) {
  std::vector<double> times(static_cast<std::size_t>(config.grid.max_steps));
  for (int k = 1; k <= config.grid.max_steps; ++k) times[static_cast<std::size_t>(k - 1)] = config.grid.time(k);
  return generate_unit(config, LogErrorSampler(config, times), unit_id, stream);
}

std::string unit_name(int index) {
  std::string digits = std::to_string(index);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return "unit-" + digits;
}

Fleet sample_fleet(const SimulatorConfig& config) {
  config.validate();
  std::vector<double> times(static_cast<std::size_t>(config.grid.max_steps));
  for (int k = 1; k <= config.grid.max_steps; ++k) times[static_cast<std::size_t>(k - 1)] = config.grid.time(k);
  const LogErrorSampler sampler(config, times);

  Fleet fleet;
  fleet.truths.reserve(static_cast<std::size_t>(config.n_units));
  fleet.traces.reserve(static_cast<std::size_t>(config.n_units));
  for (int i = 0; i < config.n_units; ++i) {
    UnitStream stream(config.seed, static_cast<std::uint64_t>(i));
    auto unit = generate_unit(config, sampler, unit_name(i + 1), stream);
    fleet.truths.push_back(std::move(unit.truth));
    fleet.traces.push_back(std::move(unit.trace));
  }
  return fleet;
}

std::vector<PredictionTrace> point_mass_traces(std::span<const UnitTruth> truths,
                                               const TimeGrid& grid) {
  std::vector<PredictionTrace> traces;
  traces.reserve(truths.size());
  for (const auto& truth : truths) {
    PredictionTrace trace{truth.unit_id, {}};
    const int n = steps_before_failure(grid, truth.failure_time);
    for (int k = 1; k <= n; ++k) {
      const double t = grid.time(k);
      trace.entries.push_back({t, PointMass{truth.failure_time - t}});
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace pdm
