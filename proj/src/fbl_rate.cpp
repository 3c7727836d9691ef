#include "fblpower/fbl_rate.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fblpower::fbl {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Acklam's rational approximation to the lower-tail normal quantile,
// valid for p in (0, 0.5]. Accurate to ~1e-9 relative; Newton below
// pushes it to machine precision.
double probit_guess(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  if (p < 0.02425) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double q_tail(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

}  // namespace

double q_inv(double eps) {
  if (!(eps > 0.0 && eps < 0.5))
    throw std::domain_error("q_inv: eps must lie in (0, 0.5)");
  double x = -probit_guess(eps);
  for (int it = 0; it < 3; ++it) {
    const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
    if (pdf <= 0.0) break;
    x += (q_tail(x) - eps) / pdf;
  }
  return x;
}

double a_coeff(double eps, int blocklength, int k_devices) {
  if (k_devices < 0 || blocklength <= k_devices)
    throw std::invalid_argument("a_coeff: need 0 <= K < blocklength");
  return q_inv(eps) / std::sqrt(static_cast<double>(blocklength - k_devices));
}

double g_eval(double x) {
  if (!(x > 0.0)) throw std::domain_error("g_eval: x must be > 0");
  return (x + 1.0) * std::log1p(1.0 / x) / std::sqrt(2.0 * x + 1.0);
}

namespace {

// geometric bisection for a strictly decreasing positive-argument function
template <class F>
double bisect_decreasing(F fn, double target, double lo, double hi) {
  // expand until fn(lo) >= target >= fn(hi)
  for (int it = 0; it < 2100 && fn(lo) < target; ++it) lo *= 0.5;
  for (int it = 0; it < 2100 && fn(hi) > target; ++it) hi *= 2.0;
  if (!(fn(lo) >= target && fn(hi) <= target))
    throw std::domain_error("bisect: failed to bracket target");
  for (int it = 0; it < 400 && hi - lo > 1e-13 * lo; ++it) {
    const double mid = std::sqrt(lo * hi);
    (fn(mid) >= target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

}  // namespace

double g_inv(double a) {
  if (!(a > 0.0)) throw std::domain_error("g_inv: a must be > 0");
  return bisect_decreasing([](double x) { return g_eval(x); }, a, 1.0, 1.0);
}

double f_eval(double x, double a) {
  if (!(x > 0.0)) throw std::domain_error("f_eval: x must be > 0");
  if (!(a >= 0.0)) throw std::domain_error("f_eval: a must be >= 0");
  return std::log1p(1.0 / x) - a * std::sqrt(2.0 * x + 1.0) / (x + 1.0);
}

double f_inv(double c, double a) {
  if (!(c >= 0.0)) throw std::domain_error("f_inv: c must be >= 0");
  if (!(a >= 0.0)) throw std::domain_error("f_inv: a must be >= 0");
  if (a == 0.0) {
    if (c == 0.0) throw std::domain_error("f_inv: c = 0 with a = 0 has no finite solution");
    return 1.0 / std::expm1(c);
  }
  const double x_max = g_inv(a);
  if (c == 0.0) return x_max;
  return bisect_decreasing([a](double x) { return f_eval(x, a); }, c, x_max, x_max);
}

double rate_fbl(double gamma, double beta, int blocklength, double eps) {
  if (!(gamma >= 0.0)) throw std::domain_error("rate_fbl: gamma must be >= 0");
  if (!(beta >= 0.0 && beta < 1.0)) throw std::domain_error("rate_fbl: beta must lie in [0, 1)");
  if (blocklength < 1) throw std::invalid_argument("rate_fbl: blocklength must be >= 1");
  if (gamma == 0.0) return 0.0;
  const double one_m_b = 1.0 - beta;
  const double ip1 = 1.0 + gamma;
  const double dispersion = 1.0 - 1.0 / (ip1 * ip1);
  return one_m_b * std::log2(ip1) -
         std::sqrt(one_m_b * dispersion / blocklength) * q_inv(eps) / kLn2;
}

FblParams FblParams::make(int blocklength, int k_devices, double eps) {
  FblParams fp;
  fp.blocklength = blocklength;
  fp.beta = static_cast<double>(k_devices) / blocklength;
  fp.epsilon = eps;
  fp.a = a_coeff(eps, blocklength, k_devices);
  fp.x_max = g_inv(fp.a);
  return fp;
}

FblParams FblParams::shannon(int blocklength, int k_devices) {
  FblParams fp;
  fp.blocklength = blocklength;
  fp.beta = static_cast<double>(k_devices) / blocklength;
  fp.epsilon = 0.0;
  fp.a = 0.0;
  fp.x_max = std::numeric_limits<double>::infinity();
  return fp;
}

double rate_lb(double gamma_hat, const FblParams& fp) {
  if (!(gamma_hat >= 0.0)) throw std::domain_error("rate_lb: gamma must be >= 0");
  if (gamma_hat == 0.0) return 0.0;
  // same value as rate_fbl at gamma_hat; f keeps it defined for a = 0 too
  return (1.0 - fp.beta) / kLn2 * f_eval(1.0 / gamma_hat, fp.a);
}

double chi_min(const FblParams& fp, double rate_req) {
  if (!(rate_req >= 0.0)) throw std::domain_error("chi_min: rate_req must be >= 0");
  const double c = rate_req * kLn2 / (1.0 - fp.beta);
  if (c == 0.0 && fp.a == 0.0) return 0.0;  // unconstrained
  return 1.0 / f_inv(c, fp.a);
}

Eigen::VectorXd sinr_lb_mrc(const Eigen::VectorXd& p_data, const Eigen::VectorXd& sigma,
                            const Eigen::VectorXd& delta, int m_antennas) {
  const auto k = p_data.size();
  if (sigma.size() != k || delta.size() != k)
    throw std::invalid_argument("sinr_lb_mrc: size mismatch");
  if (m_antennas < 2) throw std::invalid_argument("sinr_lb_mrc: need M >= 2");
  const double sig_tot = p_data.dot(sigma);
  const double err_tot = p_data.dot(delta);
  Eigen::VectorXd out(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double num = p_data[i] * (m_antennas - 1) * sigma[i];
    out[i] = num / (sig_tot - p_data[i] * sigma[i] + err_tot + 1.0);
  }
  return out;
}

Eigen::VectorXd sinr_lb_zf(const Eigen::VectorXd& p_data, const Eigen::VectorXd& sigma,
                           const Eigen::VectorXd& delta, int m_antennas) {
  const auto k = p_data.size();
  if (sigma.size() != k || delta.size() != k)
    throw std::invalid_argument("sinr_lb_zf: size mismatch");
  if (m_antennas <= k) throw std::invalid_argument("sinr_lb_zf: need M > K");
  const double den = p_data.dot(delta) + 1.0;
  Eigen::VectorXd out(k);
  for (Eigen::Index i = 0; i < k; ++i)
    out[i] = (m_antennas - static_cast<int>(k)) * sigma[i] * p_data[i] / den;
  return out;
}

}  // namespace fblpower::fbl
