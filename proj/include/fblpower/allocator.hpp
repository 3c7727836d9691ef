#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "fblpower/approx.hpp"
#include "fblpower/gp.hpp"
#include "fblpower/scenario.hpp"

namespace fblpower {

enum class Receiver { mrc, zf };
const char* to_string(Receiver r);

struct PowerAllocation {
  Eigen::VectorXd p_pilot;
  Eigen::VectorXd p_data;
  Eigen::VectorXd chi;  // per-device SINR auxiliaries from the last GP
};

struct IterationStep {
  double objective = 0.0;   // weighted sum of rate lower bounds after this step
  Eigen::VectorXd anchors;  // SINR anchors the surrogate was built at
  gp::SolveStatus gp_status = gp::SolveStatus::optimal;
  double gp_violation = 0.0;  // worst relative constraint violation at the GP point
  double wall_ms = 0.0;
};

enum class AllocStatus { converged, infeasible, max_iter };
const char* to_string(AllocStatus s);

// weighted_sum is the algorithm's own operating score: the finite-blocklength
// LB sum for the proposed and fixed-pilot algorithms, the Shannon sum for the
// upper bound, and the zeroed finite-blocklength sum for the conventional
// baseline. rate_lb always reports the unzeroed per-device values.
struct AllocationResult {
  AllocStatus status = AllocStatus::infeasible;
  PowerAllocation allocation;
  Eigen::VectorXd gamma;         // SINR lower bounds at the final powers
  Eigen::VectorXd rate_lb;       // per-device rate lower bound
  Eigen::VectorXd rate_shannon;  // per-device Shannon rate at the same SINR
  double weighted_sum = 0.0;
  double weighted_shannon = 0.0;
  double phi = 0.0;  // feasibility margin; >= 1 means all targets achievable
  std::vector<IterationStep> trace;
};

struct AllocateOptions {
  double xi = 1e-4;  // relative objective change that stops the outer loop
  int max_outer = 50;
  double gp_tol = 1e-9;
};

enum class Baseline { upper_bound, conventional, fixed_pilot };
const char* to_string(Baseline b);

// GP builders, exposed for structural and algebraic tests. chi_floor holds
// the per-device SINR thresholds implied by the rate targets; pilot_bound is
// the monomial underestimate of the pilot product, anchored at the current
// pilot powers.
gp::GpProblem build_gp_mrc(const Scenario& sc, const Eigen::VectorXd& w_hat,
                           const Eigen::VectorXd& chi_floor);
gp::GpProblem build_gp_zf(const Scenario& sc, const Eigen::VectorXd& w_hat,
                          const Eigen::VectorXd& chi_floor,
                          const approx::MonomialBound& pilot_bound);
gp::GpProblem build_feasibility_gp(const Scenario& sc, Receiver receiver,
                                   const Eigen::VectorXd& chi_floor,
                                   const approx::MonomialBound* pilot_bound = nullptr);

AllocationResult optimize(const Scenario& sc, Receiver receiver,
                          const AllocateOptions& opts = {});
AllocationResult run_baseline(const Scenario& sc, Receiver receiver, Baseline kind,
                              const AllocateOptions& opts = {});

std::string allocation_to_json(const AllocationResult& r);
PowerAllocation load_allocation(const std::string& path);

}  // namespace fblpower
