#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "fblpower/allocator.hpp"
#include "fblpower/scenario.hpp"

namespace fblpower::mc {

struct McConfig {
  int n_trials = 2000;
  std::uint64_t base_seed = 1;
  Receiver receiver = Receiver::mrc;
  int threads = 1;
};

// Per-realization SINR for every device given the estimated and error parts
// of the channel (columns are devices). MRC combines with the estimates
// themselves; ZF with the pseudo-inverse of the estimate matrix, verified to
// invert it to within 1e-8 in the max norm. A numerically singular combiner
// throws std::runtime_error.
Eigen::VectorXd instantaneous_sinr(const Eigen::MatrixXcd& h_hat,
                                   const Eigen::MatrixXcd& h_tilde,
                                   const Eigen::VectorXd& p_data, Receiver receiver);

struct ErgodicRate {
  Eigen::VectorXd mean;         // empirical mean of clamped per-trial rates
  Eigen::VectorXd std_err;      // standard error of that mean
  Eigen::VectorXd lower_bound;  // closed-form rate bound at the same powers
  int clamped = 0;              // negative instantaneous rates clamped to 0
  int redrawn = 0;              // trials redrawn after a singular combiner
};

// Seeded Monte Carlo estimate of the per-device ergodic rate under the given
// powers: each trial draws true channels, simulates pilot estimation, forms
// the instantaneous SINR and evaluates the finite-blocklength rate. Trial t,
// attempt a uses the stream derive_seed(base_seed, {t, a}); results do not
// depend on the thread count.
ErgodicRate empirical_ergodic_rate(const Scenario& sc, const PowerAllocation& alloc,
                                   const McConfig& mc);

enum class Algorithm { proposed, upper_bound, conventional, fixed_pilot };
const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

enum class SweepAxis { energy, device_count, blocklength };
const char* to_string(SweepAxis a);
SweepAxis axis_from_string(const std::string& s);

// One experiment family: sweep a single axis, hold the rest of the drop
// parameters fixed, and rerun every algorithm on `snapshots` random device
// placements per axis value.
struct SweepSpec {
  SweepAxis axis = SweepAxis::energy;
  std::vector<double> values;
  int snapshots = 20;
  Receiver receiver = Receiver::mrc;
  std::uint64_t base_seed = 1;
  int threads = 1;

  int m_antennas = 100;
  int k_devices = 10;
  int blocklength = 100;
  double energy = 2.0;
  double rate_req = 1.0;
  double epsilon = 1e-9;
  double dist_min_m = 50.0;
  double dist_max_m = 500.0;
  AllocateOptions alloc_opts;
};

struct SweepRow {
  double value = 0.0;
  Algorithm algorithm = Algorithm::proposed;
  int snapshot = 0;
  double weighted_sum = 0.0;   // scored with per-device zeroing on violation
  int infeasible_count = 0;    // devices zeroed in this snapshot's score
};

struct SweepResult {
  SweepAxis axis = SweepAxis::energy;
  std::vector<SweepRow> rows;  // ordered by (value index, snapshot, algorithm)

  std::string csv() const;  // axis,value,algorithm,snapshot,weighted_sum,infeasible_count
  std::string summary_json() const;  // per (value, algorithm): mean, std_err, mean zeroed
};

// The random drop solved by cell (value_index, snapshot): distances uniform
// in [dist_min_m, dist_max_m], weights uniform in (0, 1], gains from the
// path-loss model. Exposed so tests and the CLI can pin exact scenarios.
Scenario sweep_scenario(const SweepSpec& spec, int value_index, int snapshot);

SweepResult run_sweep(const SweepSpec& spec, const std::vector<Algorithm>& algorithms);

}  // namespace fblpower::mc
