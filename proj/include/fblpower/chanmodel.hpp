#pragma once

#include <Eigen/Dense>
#include <utility>

#include "fblpower/rng.hpp"

namespace fblpower::chan {

// MMSE estimate/error variances (sigma, delta) for a device with gain alpha
// spending pilot power p_pilot on each of the K pilot symbols:
//   sigma = alpha^2 K p / (alpha K p + 1),  delta = alpha / (alpha K p + 1)
// They satisfy sigma + delta = alpha; p_pilot = 0 degenerates to (0, alpha).
std::pair<double, double> mmse_stats(double alpha, int k_devices, double p_pilot);

struct EstimationStats {
  Eigen::VectorXd sigma;
  Eigen::VectorXd delta;
};
EstimationStats mmse_stats_all(const Eigen::VectorXd& alphas, int k_devices,
                               const Eigen::VectorXd& p_pilot);

// M x K matrix whose column k is CN(0, alpha_k I). Columns are drawn in
// device order, antennas innermost; the order is part of the contract so
// seeded runs reproduce bit-identically.
Eigen::MatrixXcd draw_true_channels(Rng& rng, const Eigen::VectorXd& alphas, int m_antennas);

// One device's pilot observation and MMSE estimate: returns (h_hat, h_tilde)
// with h_hat + h_tilde = h exactly. Requires p_pilot > 0.
std::pair<Eigen::VectorXcd, Eigen::VectorXcd> simulate_pilot_estimation(
    Rng& rng, const Eigen::VectorXcd& h, double alpha, int k_devices, double p_pilot);

}  // namespace fblpower::chan
