#pragma once

#include <Eigen/Core>

namespace fblpower::approx {

// Anchors below this make the log-tangent bound on the dispersion root
// invalid somewhere to its right; callers must stay at or above it.
// Exact value (sqrt(17) - 3) / 4.
constexpr double kDispersionAnchorMin = 0.2807764064044151;

// G(x) = sqrt(1 - 1/(1+x)^2): the square root of the channel dispersion as a
// function of SINR. Concave on x >= 0.
double g_dispersion(double x);

// bound(x) = rho * ln x + eta
struct LogBound {
  double rho = 0.0;
  double eta = 0.0;
  double operator()(double x) const;
};

// Tangent at `anchor` giving G(x) <= rho ln x + eta for all x >= the anchor
// threshold above. Throws std::domain_error below the threshold.
LogBound dispersion_upper(double anchor);

// Tangent at `anchor` > 0 giving ln(1+x) >= rho ln x + eta for all x > 0.
LogBound log1p_lower(double anchor);

// prod_i (1 + x_i) >= lambda * prod_i x_i^tau_i, with value and gradient
// matching at the anchor (each entry > 0).
struct MonomialBound {
  double lambda = 1.0;
  Eigen::VectorXd tau;
  double operator()(const Eigen::VectorXd& x) const;
};
MonomialBound product_lower(const Eigen::VectorXd& anchor);

// Coefficients of the anchored lower bound
//   sum_k wtilde_k [ln(1+chi_k) - a_k G(chi_k)]  >=  sum_k w_hat_k ln chi_k + constant
// with wtilde_k = (1-beta) w_k / ln2. Devices with a_k = 0 contribute only the
// log1p part (Shannon behaviour). Equality holds at the anchor.
struct SurrogateWeights {
  Eigen::VectorXd w_hat;
  double constant = 0.0;
};
SurrogateWeights surrogate_weights(const Eigen::VectorXd& weights, const Eigen::VectorXd& a,
                                   double beta, const Eigen::VectorXd& chi_anchor);

double surrogate_value(const SurrogateWeights& sw, const Eigen::VectorXd& chi);

// The exact objective the surrogate bounds from below; identical to the
// weighted sum of rate lower bounds evaluated at SINR = chi.
double true_objective(const Eigen::VectorXd& weights, const Eigen::VectorXd& a, double beta,
                      const Eigen::VectorXd& chi);

}  // namespace fblpower::approx
