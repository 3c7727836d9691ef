#include "fblpower/approx.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace fblpower::approx {

namespace {
constexpr double kLn2 = 0.6931471805599453;
}

double g_dispersion(double x) {
  if (!(x >= 0.0)) throw std::domain_error("g_dispersion: x must be >= 0");
  const double ip1 = 1.0 + x;
  return std::sqrt(1.0 - 1.0 / (ip1 * ip1));
}

double LogBound::operator()(double x) const { return rho * std::log(x) + eta; }

LogBound dispersion_upper(double anchor) {
  if (!(anchor >= kDispersionAnchorMin))
    throw std::domain_error("dispersion_upper: anchor below the validity threshold");
  const double s = std::sqrt(anchor * anchor + 2.0 * anchor);
  const double ip1 = 1.0 + anchor;
  LogBound b;
  b.rho = anchor / s - anchor * s / (ip1 * ip1);
  b.eta = g_dispersion(anchor) - b.rho * std::log(anchor);
  return b;
}

LogBound log1p_lower(double anchor) {
  if (!(anchor > 0.0)) throw std::domain_error("log1p_lower: anchor must be > 0");
  LogBound b;
  b.rho = anchor / (1.0 + anchor);
  b.eta = std::log1p(anchor) - b.rho * std::log(anchor);
  return b;
}

double MonomialBound::operator()(const Eigen::VectorXd& x) const {
  double ln = std::log(lambda);
  for (Eigen::Index i = 0; i < x.size(); ++i) ln += tau[i] * std::log(x[i]);
  return std::exp(ln);
}

MonomialBound product_lower(const Eigen::VectorXd& anchor) {
  if (anchor.size() < 1) throw std::invalid_argument("product_lower: empty anchor");
  MonomialBound mb;
  mb.tau.resize(anchor.size());
  double ln_lambda = 0.0;
  for (Eigen::Index i = 0; i < anchor.size(); ++i) {
    if (!(anchor[i] > 0.0)) throw std::domain_error("product_lower: anchor entries must be > 0");
    // per-coordinate log tangent; the product bound is their product
    const LogBound b = log1p_lower(anchor[i]);
    mb.tau[i] = b.rho;
    ln_lambda += b.eta;
  }
  mb.lambda = std::exp(ln_lambda);
  return mb;
}

SurrogateWeights surrogate_weights(const Eigen::VectorXd& weights, const Eigen::VectorXd& a,
                                   double beta, const Eigen::VectorXd& chi_anchor) {
  const auto k = weights.size();
  if (a.size() != k || chi_anchor.size() != k)
    throw std::invalid_argument("surrogate_weights: size mismatch");
  SurrogateWeights sw;
  sw.w_hat.resize(k);
  int nonpositive = 0;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double wt = (1.0 - beta) * weights[i] / kLn2;
    const LogBound lo = log1p_lower(chi_anchor[i]);
    double rho_g = 0.0, eta_g = 0.0;
    if (a[i] > 0.0) {
      const LogBound up = dispersion_upper(chi_anchor[i]);
      rho_g = up.rho;
      eta_g = up.eta;
    }
    sw.w_hat[i] = wt * (lo.rho - a[i] * rho_g);
    sw.constant += wt * (lo.eta - a[i] * eta_g);
    if (weights[i] > 0.0 && sw.w_hat[i] <= 0.0) ++nonpositive;
  }
  if (nonpositive > 0)
    std::fprintf(stderr,
                 "fblpower: warning: %d surrogate weight(s) non-positive; the next iterate may "
                 "park those devices at their SINR floor\n",
                 nonpositive);
  return sw;
}

double surrogate_value(const SurrogateWeights& sw, const Eigen::VectorXd& chi) {
  double v = sw.constant;
  for (Eigen::Index i = 0; i < chi.size(); ++i) v += sw.w_hat[i] * std::log(chi[i]);
  return v;
}

double true_objective(const Eigen::VectorXd& weights, const Eigen::VectorXd& a, double beta,
                      const Eigen::VectorXd& chi) {
  double v = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    const double wt = (1.0 - beta) * weights[i] / kLn2;
    v += wt * (std::log1p(chi[i]) - a[i] * g_dispersion(chi[i]));
  }
  return v;
}

}  // namespace fblpower::approx
