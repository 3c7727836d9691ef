#pragma once

#include <Eigen/Core>

namespace fblpower::fbl {

// Inverse upper-tail of the standard normal: returns x with Q(x) = eps.
// Rational initial guess polished by Newton on erfc; absolute error stays
// below 1e-9 for eps in [1e-12, 0.5).
double q_inv(double eps);

// a = Q^{-1}(eps) / sqrt(L - K), the coefficient multiplying the dispersion
// penalty once the (1 - beta) payload fraction is pulled out.
double a_coeff(double eps, int blocklength, int k_devices);

// g(x) = (x + 1) ln(1 + 1/x) / sqrt(2x + 1); strictly decreasing on x > 0.
// Its inverse bounds the region where the rate expression increases with SINR.
double g_eval(double x);
double g_inv(double a);  // unique x with g(x) = a, for a > 0

// f(x) = ln(1 + 1/x) - a sqrt(2x + 1) / (x + 1); the rate in nats per payload
// symbol when evaluated at x = 1/SINR.
double f_eval(double x, double a);
// inverse of f on (0, g_inv(a)] where f decreases from +inf to 0; c must be >= 0
// (for a = 0 this is the Shannon case with closed form 1/(e^c - 1))
double f_inv(double c, double a);

// Normal-approximation achievable rate in bit/s/Hz at SINR gamma with payload
// fraction 1 - beta of the L-symbol frame. Signed value, no clamping.
double rate_fbl(double gamma, double beta, int blocklength, double eps);

// Per-device bundle of the blocklength-dependent quantities.
struct FblParams {
  int blocklength = 100;
  double beta = 0.1;
  double epsilon = 1e-9;
  double a = 0.0;      // dispersion coefficient; 0 switches to Shannon behaviour
  double x_max = 0.0;  // g_inv(a); +inf when a == 0

  static FblParams make(int blocklength, int k_devices, double eps);
  static FblParams shannon(int blocklength, int k_devices);  // a = 0 variant
};

double rate_lb(double gamma_hat, const FblParams& fp);

// Smallest SINR such that the rate lower bound meets rate_req; this is the
// monomial threshold used by the power optimizer. Returns 0 when the target
// is 0 and a == 0 (no constraint).
double chi_min(const FblParams& fp, double rate_req);

// Closed-form SINR lower bounds under MMSE estimation.
// sigma/delta are the per-device estimate/error variances, p_data the payload
// powers. MRC treats the other estimates as noise; ZF nulls them.
Eigen::VectorXd sinr_lb_mrc(const Eigen::VectorXd& p_data, const Eigen::VectorXd& sigma,
                            const Eigen::VectorXd& delta, int m_antennas);
Eigen::VectorXd sinr_lb_zf(const Eigen::VectorXd& p_data, const Eigen::VectorXd& sigma,
                           const Eigen::VectorXd& delta, int m_antennas);

}  // namespace fblpower::fbl
