#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fblpower::gp {

using VarId = int;

// coeff * prod_j x_j^exps[j]; coeff must stay > 0
struct Monomial {
  double coeff = 1.0;
  std::map<VarId, double> exps;

  Monomial() = default;
  explicit Monomial(double c) : coeff(c) {}
  Monomial(double c, VarId v, double e = 1.0) : coeff(c) { exps[v] = e; }

  Monomial& operator*=(const Monomial& o);
  friend Monomial operator*(Monomial a, const Monomial& b) { return a *= b; }
};

// sum of monomials; multiplication merges terms with equal exponent vectors
struct Posynomial {
  std::vector<Monomial> terms;

  Posynomial() = default;
  Posynomial(const Monomial& m) : terms{m} {}  // NOLINT: implicit by design
  Posynomial(double c) : terms{Monomial(c)} {}

  Posynomial& operator+=(const Posynomial& o);
  friend Posynomial operator+(Posynomial a, const Posynomial& b) { return a += b; }
  friend Posynomial operator*(const Posynomial& a, const Posynomial& b);
  std::size_t size() const { return terms.size(); }
};

inline Posynomial operator+(const Monomial& a, const Monomial& b) {
  Posynomial p(a);
  p += b;
  return p;
}

double eval(const Monomial& m, const Eigen::VectorXd& x);
double eval(const Posynomial& p, const Eigen::VectorXd& x);

struct Constraint {
  Posynomial lhs;
  Monomial rhs;
  std::string label;  // used in diagnostics only
};

// maximize prod_j x_j^objective_exps[j] subject to posynomial <= monomial
class GpProblem {
 public:
  VarId add_variable(const std::string& name, double upper_bound = 0.0);  // 0 = unbounded
  VarId find_variable(const std::string& name) const;                     // -1 if absent
  void set_objective_exponent(VarId v, double e);
  void add_constraint(Posynomial lhs, Monomial rhs, std::string label = "");

  int n_vars() const { return static_cast<int>(names_.size()); }
  const std::string& name(VarId v) const { return names_[v]; }
  const std::vector<double>& upper_bounds() const { return upper_bounds_; }
  const Eigen::VectorXd objective() const;
  const std::vector<Constraint>& constraints() const { return constraints_; }

 private:
  std::vector<std::string> names_;
  std::vector<double> upper_bounds_;
  std::map<std::string, VarId> by_name_;
  std::map<VarId, double> objective_exps_;
  std::vector<Constraint> constraints_;
};

// One log-domain constraint: log-sum-exp(rows * y + offs) <= 0.
struct LogConstraint {
  Eigen::MatrixXd rows;
  Eigen::VectorXd offs;
};

// Maximizing the monomial objective becomes minimizing -obj . y.
struct LogForm {
  Eigen::VectorXd obj;
  std::vector<LogConstraint> cons;
};
LogForm log_transform(const GpProblem& p);

enum class SolveStatus { optimal, infeasible, max_iter };
const char* to_string(SolveStatus s);

struct SolveOptions {
  double tol = 1e-9;    // stop when (#constraints)/t drops below this
  int max_newton = 500;  // global Newton-step budget; exceeding it -> max_iter
  std::optional<Eigen::VectorXd> warm_start;  // linear-domain point
};

struct GpSolution {
  SolveStatus status = SolveStatus::max_iter;
  Eigen::VectorXd x;           // linear domain
  double log_objective = 0.0;  // sum_j c_j ln x_j at x
  double kkt_residual = 0.0;
  double max_violation = 0.0;  // max_i (posy_i(x)/mono_i(x) - 1)
  int newton_steps = 0;
};

// Log-barrier interior-point solve. Deterministic: fixed iteration order,
// fixed parameters (t multiplier 10, backtracking 0.25 / 0.5), no randomness.
// Iterates live in |ln x| <= 46, i.e. x in [1e-20, 1e20].
GpSolution solve(const GpProblem& p, const SolveOptions& opts = {});

// Exhaustive log-spaced grid with one refinement pass; at most 5 variables.
// Test oracle: evaluates the original posynomials directly, shares nothing
// with the barrier path. Ranges default to [1e-6, 1e6] per variable.
struct GridResult {
  bool feasible = false;
  Eigen::VectorXd x;
  double log_objective = 0.0;
};
GridResult grid_oracle(const GpProblem& p, int resolution,
                       const std::vector<std::pair<double, double>>& ranges = {});

// Plain-text round trip, one constraint per line:
//   maximize chi1^0.8 * chi2
//   1.5 * p1^2 * p2 + 2 * p1 <= 4 * p2
// Upper bounds serialize as single-variable constraints.
std::string to_text(const GpProblem& p);
GpProblem from_text(const std::string& text);

}  // namespace fblpower::gp
