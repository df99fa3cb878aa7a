#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pdm/core.hpp"

namespace pdm {

// Virtual run-to-failure fleet: normally distributed failure times and
// lognormal RUL predictions whose log-errors are correlated over time.
struct SimulatorConfig {
  double mu_tf = 225.0;
  double sigma_tf = 40.0;
  TimeGrid grid{10.0, 100};
  double sigma_ln_eps = 0.4;
  double corr_length = 50.0;
  int n_units = 2000;
  std::uint64_t seed = 0;

  void validate() const;
};

// rho_ij = exp(-|t_i - t_j| / l)
Eigen::MatrixXd exponential_correlation_matrix(std::span<const double> times, double corr_length);

// Independent deterministic random stream for one unit of one fleet.
class UnitStream {
 public:
  UnitStream(std::uint64_t seed, std::uint64_t unit_index);

  double standard_normal() { return normal_(engine_); }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Draws zero-mean MVN vectors with covariance D R D, D = sigma_ln_eps * I.
// The Cholesky factor is computed once; prefixes of a draw are exact draws
// for the corresponding leading times.
class LogErrorSampler {
 public:
  LogErrorSampler(const SimulatorConfig& config, std::span<const double> times);

  std::size_t size() const { return static_cast<std::size_t>(factor_.rows()); }
  std::vector<double> sample(UnitStream& stream) const { return sample(stream, size()); }
  std::vector<double> sample(UnitStream& stream, std::size_t prefix) const;
  const Eigen::MatrixXd& covariance() const { return covariance_; }

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd factor_;
};

std::vector<double> sample_log_error_path(const SimulatorConfig& config,
                                          std::span<const double> times, UnitStream& stream);

struct SimulatedUnit {
  UnitTruth truth;
  PredictionTrace trace;
};

// Trace entries for every grid time before failure: lognormal with median
// (T_F - t_k) * eps_k and log-spread sigma_ln_eps.
PredictionTrace build_trace(const SimulatorConfig& config, const std::string& unit_id,
                            double failure_time, std::span<const double> log_errors);

// Failure time drawn from N(mu_tf, sigma_tf), redrawn until it exceeds delta_t.
double draw_failure_time(const SimulatorConfig& config, UnitStream& stream);

SimulatedUnit generate_unit(const SimulatorConfig& config, const std::string& unit_id,
                            UnitStream& stream);
SimulatedUnit generate_unit(const SimulatorConfig& config, const LogErrorSampler& sampler,
                            const std::string& unit_id, UnitStream& stream);

struct Fleet {
  std::vector<UnitTruth> truths;
  std::vector<PredictionTrace> traces;
};

std::string unit_name(int index);

Fleet sample_fleet(const SimulatorConfig& config);

// Traces that know the truth exactly: point_mass(T_F - t_k) at each decision time.
std::vector<PredictionTrace> point_mass_traces(std::span<const UnitTruth> truths,
                                               const TimeGrid& grid);

// Number of decision times strictly before failure.
int steps_before_failure(const TimeGrid& grid, double failure_time);

}  // namespace pdm
