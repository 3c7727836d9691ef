#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fblpower/gp.hpp"

namespace fblpower::gp {
namespace {

constexpr double kLogBox = 46.0;      // iterates stay in |ln x| <= 46
constexpr double kBoxStart = 45.9;    // warm starts get clamped strictly inside
constexpr double kMu = 10.0;          // barrier parameter multiplier
constexpr double kDecrementTol = 1e-11;  // stop centering at lambda^2/2 below this
constexpr double kFeasMargin = -1e-10;   // "strictly feasible" means max lse below this

double lse(const Eigen::VectorXd& z, Eigen::VectorXd* softmax = nullptr) {
  const double zmax = z.maxCoeff();
  const Eigen::ArrayXd w = (z.array() - zmax).exp();
  const double s = w.sum();
  if (softmax) *softmax = (w / s).matrix();
  return zmax + std::log(s);
}

// One barrier subproblem: minimize -c.y + (1/t) sum_i -ln(-lse_i(y)).
struct Barrier {
  Eigen::VectorXd c;  // maximized linear objective
  std::vector<LogConstraint> cons;
  int n = 0;

  double margin(const Eigen::VectorXd& y) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& lc : cons) worst = std::max(worst, lse(lc.rows * y + lc.offs));
    return worst;
  }

  // +inf when y leaves the strict interior
  double phi(double t, const Eigen::VectorXd& y) const {
    double v = -t * c.dot(y);
    for (const auto& lc : cons) {
      const double g = lse(lc.rows * y + lc.offs);
      if (g >= 0.0) return std::numeric_limits<double>::infinity();
      v -= std::log(-g);
    }
    return v;
  }

  void grad_hess(double t, const Eigen::VectorXd& y, Eigen::VectorXd& grad,
                 Eigen::MatrixXd& hess) const {
    grad = -t * c;
    hess.setZero(n, n);
    Eigen::VectorXd p, gvec;
    for (const auto& lc : cons) {
      const double g = lse(lc.rows * y + lc.offs, &p);
      const double c2 = -1.0 / g;        // 1/slack
      const double c1 = c2 * c2;
      gvec.noalias() = lc.rows.transpose() * p;
      grad.noalias() += c2 * gvec;
      if (lc.rows.rows() == 1) {
        // linear constraint: curvature reduces to the rank-one barrier term
        hess.selfadjointView<Eigen::Lower>().rankUpdate(gvec, c1);
      } else {
        const Eigen::MatrixXd b = p.cwiseSqrt().asDiagonal() * lc.rows;
        hess.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose(), c2);
        hess.selfadjointView<Eigen::Lower>().rankUpdate(gvec, c1 - c2);
      }
    }
  }
};

struct CenterResult {
  bool centered = false;   // Newton decrement reached tolerance
  bool exhausted = false;  // global step budget ran out
};

// Damped Newton on phi_t from a strictly feasible y; y is updated in place.
CenterResult center(const Barrier& bar, double t, Eigen::VectorXd& y, int& steps_left,
                    int* steps_taken, double early_exit_margin, const Barrier* probe) {
  Eigen::VectorXd grad, delta;
  Eigen::MatrixXd hess;
  CenterResult res;
  for (int it = 0; it < 60; ++it) {  // a stage never needs this many; bail as "centered"
    if (steps_left <= 0) {
      res.exhausted = true;
      return res;
    }
    bar.grad_hess(t, y, grad, hess);

    double reg = 0.0;
    double dec2 = -1.0;
    while (true) {
      Eigen::MatrixXd h = hess.selfadjointView<Eigen::Lower>();
      if (reg > 0.0) h.diagonal().array() += reg;
      const Eigen::LLT<Eigen::MatrixXd> llt(h);
      if (llt.info() == Eigen::Success) {
        delta = llt.solve(-grad);
        dec2 = -grad.dot(delta);
        if (dec2 >= 0.0 && delta.allFinite()) break;
      }
      reg = reg == 0.0 ? 1e-10 : reg * 10.0;
      if (reg > 1e10) {
        res.centered = true;  // hopelessly ill conditioned, accept current point
        return res;
      }
    }
    if (dec2 / 2.0 <= kDecrementTol) {
      res.centered = true;
      return res;
    }

    const double phi0 = bar.phi(t, y);
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXd trial = y + step * delta;
      // strict decrease: a tie means the step rounded away, keep halving
      if (bar.phi(t, trial) < phi0 - 0.25 * step * dec2) {
        y = trial;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    --steps_left;
    if (steps_taken) ++*steps_taken;
    if (!moved) {
      res.centered = true;  // stalled at numerical precision
      return res;
    }
    if (probe && probe->margin(y.head(probe->n)) < early_exit_margin) {
      res.centered = true;
      return res;
    }
  }
  res.centered = true;
  return res;
}

void append_box(Barrier& bar) {
  for (int v = 0; v < bar.n; ++v)
    for (const double sign : {1.0, -1.0}) {
      LogConstraint lc;
      lc.rows.setZero(1, bar.n);
      lc.rows(0, v) = sign;
      lc.offs.resize(1);
      lc.offs[0] = -kLogBox;
      bar.cons.push_back(std::move(lc));
    }
}

}  // namespace

GpSolution solve(const GpProblem& p, const SolveOptions& opts) {
  const LogForm lf = log_transform(p);
  const int n = p.n_vars();

  Barrier real;  // the actual constraints, used for margins and reporting
  real.n = n;
  real.c = lf.obj;
  real.cons = lf.cons;

  Barrier phase2 = real;
  append_box(phase2);

  GpSolution sol;
  int steps_left = opts.max_newton;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  if (opts.warm_start) {
    if (opts.warm_start->size() != n)
      throw std::invalid_argument("gp solve: warm start size mismatch");
    y = opts.warm_start->array().max(1e-300).log().min(kBoxStart).max(-kBoxStart).matrix();
  }

  bool exhausted = false;
  if (real.margin(y) >= kFeasMargin) {
    // Phase I: minimize slack s subject to lse([rows | -1] [y; s] + offs) <= 0.
    Barrier ph1;
    ph1.n = n + 1;
    ph1.c = Eigen::VectorXd::Zero(n + 1);
    ph1.c[n] = -1.0;
    for (const auto& lc : real.cons) {
      LogConstraint aug;
      aug.rows.setZero(lc.rows.rows(), n + 1);
      aug.rows.leftCols(n) = lc.rows;
      aug.rows.col(n).setConstant(-1.0);
      aug.offs = lc.offs;
      ph1.cons.push_back(std::move(aug));
    }
    // box applies to y only; s starts feasible and only needs to go down
    for (int v = 0; v < n; ++v)
      for (const double sign : {1.0, -1.0}) {
        LogConstraint lc;
        lc.rows.setZero(1, n + 1);
        lc.rows(0, v) = sign;
        lc.offs.resize(1);
        lc.offs[0] = -kLogBox;
        ph1.cons.push_back(std::move(lc));
      }

    Eigen::VectorXd z(n + 1);
    z.head(n) = y;
    z[n] = real.margin(y) + 1.0;

    const double m1 = static_cast<double>(ph1.cons.size());
    double t = 1.0;
    bool feasible_point = false;
    while (true) {
      const CenterResult cr =
          center(ph1, t, z, steps_left, &sol.newton_steps, -0.5, &real);
      if (real.margin(z.head(n)) < -0.5) {
        feasible_point = true;
        break;
      }
      if (cr.exhausted) {
        exhausted = true;
        break;
      }
      if (cr.centered) {
        // certified lower bound on the optimal slack
        if (z[n] - m1 / t > -1e-9) break;
        if (m1 / t < 1e-6) {
          feasible_point = real.margin(z.head(n)) < kFeasMargin;
          break;
        }
      }
      t *= kMu;
    }
    y = z.head(n);
    if (!feasible_point) {
      sol.status = exhausted ? SolveStatus::max_iter : SolveStatus::infeasible;
      sol.x = y.array().exp().matrix();
      sol.log_objective = real.c.dot(y);
      sol.kkt_residual = std::numeric_limits<double>::quiet_NaN();
      sol.max_violation = std::max(0.0, std::expm1(real.margin(y)));
      return sol;
    }
  }

  // Phase II: follow the central path on the real problem plus the box.
  const double m2 = static_cast<double>(phase2.cons.size());
  double t = 1.0;
  bool centered_last = false;
  while (steps_left > 0) {
    const CenterResult cr = center(phase2, t, y, steps_left, &sol.newton_steps, 0.0, nullptr);
    centered_last = cr.centered;
    if (cr.exhausted) {
      exhausted = true;
      break;
    }
    if (m2 / t < opts.tol) break;
    t *= kMu;
  }

  sol.status = (centered_last && m2 / t < opts.tol) ? SolveStatus::optimal : SolveStatus::max_iter;
  if (exhausted) sol.status = SolveStatus::max_iter;
  sol.x = y.array().exp().matrix();
  sol.log_objective = real.c.dot(y);
  sol.max_violation = std::max(0.0, std::expm1(real.margin(y)));
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  phase2.grad_hess(t, y, grad, hess);
  sol.kkt_residual = grad.lpNorm<Eigen::Infinity>() / t + m2 / t;
  return sol;
}

}  // namespace fblpower::gp
