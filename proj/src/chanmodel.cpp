#include "fblpower/chanmodel.hpp"

#include <stdexcept>

namespace fblpower::chan {

std::pair<double, double> mmse_stats(double alpha, int k_devices, double p_pilot) {
  if (!(alpha > 0.0)) throw std::invalid_argument("mmse_stats: alpha must be > 0");
  if (k_devices < 1) throw std::invalid_argument("mmse_stats: K must be >= 1");
  if (!(p_pilot >= 0.0)) throw std::invalid_argument("mmse_stats: p_pilot must be >= 0");
  const double s = alpha * k_devices * p_pilot;
  return {alpha * s / (s + 1.0), alpha / (s + 1.0)};
}

EstimationStats mmse_stats_all(const Eigen::VectorXd& alphas, int k_devices,
                               const Eigen::VectorXd& p_pilot) {
  if (alphas.size() != p_pilot.size()) throw std::invalid_argument("mmse_stats_all: size mismatch");
  EstimationStats st;
  st.sigma.resize(alphas.size());
  st.delta.resize(alphas.size());
  for (Eigen::Index i = 0; i < alphas.size(); ++i)
    std::tie(st.sigma[i], st.delta[i]) = mmse_stats(alphas[i], k_devices, p_pilot[i]);
  return st;
}

Eigen::MatrixXcd draw_true_channels(Rng& rng, const Eigen::VectorXd& alphas, int m_antennas) {
  if (m_antennas < 1) throw std::invalid_argument("draw_true_channels: M must be >= 1");
  Eigen::MatrixXcd h(m_antennas, alphas.size());
  for (Eigen::Index k = 0; k < alphas.size(); ++k) {
    if (!(alphas[k] >= 0.0)) throw std::invalid_argument("draw_true_channels: alpha must be >= 0");
    for (int m = 0; m < m_antennas; ++m) h(m, k) = rng.cnormal(alphas[k]);
  }
  return h;
}

std::pair<Eigen::VectorXcd, Eigen::VectorXcd> simulate_pilot_estimation(
    Rng& rng, const Eigen::VectorXcd& h, double alpha, int k_devices, double p_pilot) {
  if (!(p_pilot > 0.0))
    throw std::invalid_argument("simulate_pilot_estimation: p_pilot must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("simulate_pilot_estimation: alpha must be > 0");
  if (k_devices < 1) throw std::invalid_argument("simulate_pilot_estimation: K must be >= 1");
  const double s = alpha * k_devices * p_pilot;
  const double scale = s / (s + 1.0);
  const double noise_var = 1.0 / (k_devices * p_pilot);  // post-despreading pilot noise
  Eigen::VectorXcd h_hat(h.size());
  for (Eigen::Index m = 0; m < h.size(); ++m)
    h_hat[m] = scale * (h[m] + rng.cnormal(noise_var));
  return {h_hat, h - h_hat};
}

}  // namespace fblpower::chan
