#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fblpower/allocator.hpp"
#include "fblpower/approx.hpp"
#include "fblpower/chanmodel.hpp"
#include "fblpower/fbl_rate.hpp"
#include "fblpower/gp.hpp"
#include "fblpower/mc.hpp"
#include "fblpower/rng.hpp"
#include "fblpower/scenario.hpp"

// Eight self-contained checks, one per command-line argument 1..8. Each run
// prints exactly one [PASS]/[FAIL] line on stdout; the reasons for a failure
// go to stderr. Exit code 0 iff the criterion holds.

namespace {

using namespace fblpower;
using Eigen::MatrixXcd;
using Eigen::VectorXd;

struct Checker {
  bool ok = true;
  int failures = 0;

  void expect(bool cond, const std::string& what) {
    if (cond) return;
    ok = false;
    if (++failures <= 24) std::fprintf(stderr, "  check failed: %s\n", what.c_str());
  }
};

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double log_uniform(Rng& rng, double lo, double hi) {
  return lo * std::pow(hi / lo, rng.uniform());
}

const std::string kDefaultScenario = std::string(FBLPOWER_SOURCE_DIR) + "/data/defaults.json";

// ---------------------------------------------------------------------------
// 1. The closed-form ergodic-rate lower bound is valid at every antenna count
//    and tightens as the array grows. Powers come from one optimization at
//    M = 100; the Monte Carlo then replays them at M in {50, 100, 200}.

void criterion1(Checker& c) {
  const Scenario base = load_scenario(kDefaultScenario);  // K=10, L=100, eps=1e-9
  const int ms[3] = {50, 100, 200};

  for (Receiver r : {Receiver::mrc, Receiver::zf}) {
    const AllocationResult res = optimize(base, r);
    c.expect(res.status == AllocStatus::converged,
             fmt("%s reference optimization did not converge", to_string(r)));
    if (res.status == AllocStatus::infeasible) continue;

    double mean_gap[3] = {0, 0, 0};
    for (int mi = 0; mi < 3; ++mi) {
      Scenario sc = base;
      sc.sys.m_antennas = ms[mi];
      mc::McConfig cfg;
      cfg.n_trials = 2000;
      cfg.base_seed = 31;
      cfg.receiver = r;
      const mc::ErgodicRate er = mc::empirical_ergodic_rate(sc, res.allocation, cfg);

      double rel_gap = 0.0;
      for (int k = 0; k < base.k(); ++k) {
        c.expect(er.mean[k] >= er.lower_bound[k] - 2.0 * er.std_err[k],
                 fmt("%s M=%d device %d: empirical %.6f below bound %.6f - 2se", to_string(r),
                     ms[mi], k + 1, er.mean[k], er.lower_bound[k]));
        mean_gap[mi] += (er.mean[k] - er.lower_bound[k]) / base.k();
        rel_gap += (er.mean[k] - er.lower_bound[k]) / std::max(er.mean[k], 1e-12) / base.k();
      }
      std::fprintf(stderr, "  %s M=%d mean gap %.5f, mean relative gap %.5f\n", to_string(r),
                   ms[mi], mean_gap[mi], rel_gap);
      if (r == Receiver::zf && ms[mi] == 100)
        c.expect(rel_gap < 0.02, fmt("zf relative gap %.4f not under 2%% at M=100", rel_gap));
    }
    if (r == Receiver::mrc)
      c.expect(mean_gap[0] > mean_gap[1] && mean_gap[1] > mean_gap[2],
               fmt("mrc mean gap not strictly decreasing: %.5f %.5f %.5f", mean_gap[0],
                   mean_gap[1], mean_gap[2]));
  }
}

// ---------------------------------------------------------------------------
// 2. On random feasible instances the outer loop never moves downhill and
//    stops within ten rounds at the default tolerance.

void criterion2(Checker& c) {
  for (Receiver r : {Receiver::mrc, Receiver::zf}) {
    int found = 0;
    for (int attempt = 0; attempt < 120 && found < 50; ++attempt) {
      const std::uint64_t seed =
          derive_seed(2001, {static_cast<std::uint64_t>(r == Receiver::zf),
                             static_cast<std::uint64_t>(attempt)});
      const Scenario sc = random_scenario(seed, 2 + attempt % 3, 500.0);
      const AllocationResult res = optimize(sc, r);
      if (res.status == AllocStatus::infeasible) continue;
      ++found;

      c.expect(res.status == AllocStatus::converged,
               fmt("%s attempt %d: status %s", to_string(r), attempt, to_string(res.status)));
      c.expect(static_cast<int>(res.trace.size()) - 1 <= 10,
               fmt("%s attempt %d: %zu outer iterations", to_string(r), attempt,
                   res.trace.size() - 1));
      for (std::size_t i = 1; i < res.trace.size(); ++i) {
        const double prev = res.trace[i - 1].objective;
        const double cur = res.trace[i].objective;
        c.expect(cur >= prev - 1e-9 * std::max(1.0, std::abs(cur)),
                 fmt("%s attempt %d: objective fell %.12g -> %.12g at step %zu", to_string(r),
                     attempt, prev, cur, i));
      }
    }
    c.expect(found == 50, fmt("%s: only %d of 50 feasible instances found", to_string(r), found));
  }
}

// ---------------------------------------------------------------------------
// 3. Two-device instances agree with an exhaustive grid search that shares no
//    machinery with the GP path: scalar SINR formulas, direct energy and
//    threshold checks, chi read off as the SINR itself.

struct GridBest {
  double score = -1.0;
  VectorXd arg;  // (pp1, pp2, pd1, pd2)
};

GridBest k2_reference(const Scenario& sc, Receiver r) {
  const int m = sc.sys.m_antennas;
  const double l = sc.sys.blocklength;
  const VectorXd alpha = sc.alphas();
  std::vector<fbl::FblParams> fp;
  VectorXd floors(2);
  for (int k = 0; k < 2; ++k) {
    fp.push_back(fbl::FblParams::make(sc.sys.blocklength, 2, sc.devices[k].epsilon));
    floors[k] = fbl::chi_min(fp[k], sc.devices[k].rate_req);
  }

  auto score_at = [&](double s0, double d0, double s1, double d1, const VectorXd& pd) {
    const double noise = pd[0] * d0 + pd[1] * d1 + 1.0;
    double gam[2];
    if (r == Receiver::mrc) {
      gam[0] = pd[0] * (m - 1) * s0 / (pd[1] * s1 + noise);
      gam[1] = pd[1] * (m - 1) * s1 / (pd[0] * s0 + noise);
    } else {
      gam[0] = (m - 2) * s0 * pd[0] / noise;
      gam[1] = (m - 2) * s1 * pd[1] / noise;
    }
    double ws = 0.0;
    for (int k = 0; k < 2; ++k) {
      if (gam[k] < floors[k]) return -1.0;
      ws += sc.devices[k].weight * fbl::rate_lb(gam[k], fp[k]);
    }
    return ws;
  };

  const int n = 21;
  auto sweep = [&](const VectorXd& lo, const VectorXd& hi, GridBest& best) {
    VectorXd pt(4), pd(2);
    for (int i0 = 0; i0 < n; ++i0)
      for (int i1 = 0; i1 < n; ++i1) {
        pt[0] = lo[0] * std::pow(hi[0] / lo[0], i0 / double(n - 1));
        pt[1] = lo[1] * std::pow(hi[1] / lo[1], i1 / double(n - 1));
        const auto [s0, d0] = chan::mmse_stats(alpha[0], 2, pt[0]);
        const auto [s1, d1] = chan::mmse_stats(alpha[1], 2, pt[1]);
        for (int i2 = 0; i2 < n; ++i2)
          for (int i3 = 0; i3 < n; ++i3) {
            pt[2] = lo[2] * std::pow(hi[2] / lo[2], i2 / double(n - 1));
            pt[3] = lo[3] * std::pow(hi[3] / lo[3], i3 / double(n - 1));
            if (2.0 * pt[0] + (l - 2.0) * pt[2] > sc.devices[0].energy) continue;
            if (2.0 * pt[1] + (l - 2.0) * pt[3] > sc.devices[1].energy) continue;
            pd << pt[2], pt[3];
            const double s = score_at(s0, d0, s1, d1, pd);
            if (s > best.score) {
              best.score = s;
              best.arg = pt;
            }
          }
      }
  };

  VectorXd lo(4), hi(4);
  for (int k = 0; k < 2; ++k) {
    hi[k] = sc.devices[k].energy / 2.0 * 0.9999;
    hi[k + 2] = sc.devices[k].energy / (l - 2.0) * 0.9999;
    lo[k] = hi[k] * 1e-3;
    lo[k + 2] = hi[k + 2] * 1e-4;
  }
  GridBest best;
  sweep(lo, hi, best);
  if (best.score < 0.0) return best;
  for (int pass = 0; pass < 2; ++pass) {
    VectorXd lo2(4), hi2(4);
    for (int d = 0; d < 4; ++d) {
      const double step = std::pow(hi[d] / lo[d], 1.0 / (n - 1));
      lo2[d] = best.arg[d] / step;
      hi2[d] = std::min(best.arg[d] * step, hi[d]);
    }
    lo = lo2;
    hi = hi2;
    sweep(lo, hi, best);
  }
  return best;
}

void criterion3(Checker& c) {
  for (Receiver r : {Receiver::mrc, Receiver::zf}) {
    int done = 0;
    for (int attempt = 0; attempt < 40 && done < 20; ++attempt) {
      const std::uint64_t seed =
          derive_seed(2003, {static_cast<std::uint64_t>(r == Receiver::zf),
                             static_cast<std::uint64_t>(attempt)});
      const Scenario sc = random_scenario(seed, 2, 300.0);
      const AllocationResult res = optimize(sc, r);
      if (res.status == AllocStatus::infeasible) continue;
      ++done;
      const GridBest ref = k2_reference(sc, r);
      c.expect(ref.score > 0.0, fmt("%s attempt %d: grid found no feasible point", to_string(r),
                                    attempt));
      c.expect(res.weighted_sum >= ref.score - 0.01 * std::abs(ref.score),
               fmt("%s attempt %d: optimizer %.8f vs grid %.8f", to_string(r), attempt,
                   res.weighted_sum, ref.score));
    }
    c.expect(done == 20, fmt("%s: only %d of 20 instances were feasible", to_string(r), done));
  }
}

// ---------------------------------------------------------------------------
// 4. The analytic bounds behind the surrogate: concavity of the dispersion
//    root, its log tangent above the threshold anchor, the log minorant of
//    ln(1+x), and the monomial minorant of prod(1+x).

void criterion4(Checker& c) {
  Rng rng(derive_seed(2004, {1}));
  const double slack = 1e-9;

  for (int i = 0; i < 2000; ++i) {  // midpoint concavity of G
    const double a = log_uniform(rng, 1e-6, 1e4);
    const double b = log_uniform(rng, 1e-6, 1e4);
    const double lhs = approx::g_dispersion(0.5 * (a + b));
    const double rhs = 0.5 * (approx::g_dispersion(a) + approx::g_dispersion(b));
    c.expect(lhs >= rhs - slack, fmt("concavity violated at a=%.6g b=%.6g", a, b));
  }

  for (int i = 0; i < 2000; ++i) {  // log tangent dominates G right of the threshold
    const double anchor = log_uniform(rng, approx::kDispersionAnchorMin, 1e4);
    const approx::LogBound ub = approx::dispersion_upper(anchor);
    const double x = log_uniform(rng, approx::kDispersionAnchorMin, 1e5);
    c.expect(ub(x) >= approx::g_dispersion(x) - slack,
             fmt("dispersion bound below G at anchor=%.6g x=%.6g", anchor, x));
    c.expect(std::abs(ub(anchor) - approx::g_dispersion(anchor)) <= slack,
             fmt("dispersion bound not tight at anchor=%.6g", anchor));
  }

  for (int i = 0; i < 2000; ++i) {  // ln(1+x) minorant on all of x > 0
    const double anchor = log_uniform(rng, 1e-6, 1e6);
    const approx::LogBound lb = approx::log1p_lower(anchor);
    const double x = log_uniform(rng, 1e-8, 1e8);
    c.expect(std::log1p(x) >= lb(x) - slack,
             fmt("log bound above ln(1+x) at anchor=%.6g x=%.6g", anchor, x));
    c.expect(std::abs(lb(anchor) - std::log1p(anchor)) <= slack,
             fmt("log bound not tight at anchor=%.6g", anchor));
  }

  for (int i = 0; i < 1500; ++i) {  // monomial minorant of the product, log domain
    const int dim = 1 + i % 6;
    VectorXd anchor(dim), x(dim);
    for (int d = 0; d < dim; ++d) {
      anchor[d] = log_uniform(rng, 1e-3, 1e3);
      x[d] = log_uniform(rng, 1e-3, 1e3);
    }
    const approx::MonomialBound mb = approx::product_lower(anchor);
    auto log_prod = [](const VectorXd& v) {
      double s = 0.0;
      for (int d = 0; d < v.size(); ++d) s += std::log1p(v[d]);
      return s;
    };
    const double log_bound = std::log(mb.lambda) + mb.tau.dot(x.array().log().matrix());
    c.expect(log_prod(x) >= log_bound - slack, fmt("product bound violated, dim %d", dim));
    const double log_bound_anchor =
        std::log(mb.lambda) + mb.tau.dot(anchor.array().log().matrix());
    c.expect(std::abs(log_prod(anchor) - log_bound_anchor) <= slack,
             fmt("product bound not tight at its anchor, dim %d", dim));

    if (i < 1000) {
      // gradient match at the anchor, checked in log coordinates where the
      // bound's log-derivative is the constant tau_d: central differences of
      // ln prod(1+x) must land on it
      for (int d = 0; d < dim; ++d) {
        const double h = 1e-6;
        VectorXd up = anchor, dn = anchor;
        up[d] *= std::exp(h);
        dn[d] *= std::exp(-h);
        const double fd = (log_prod(up) - log_prod(dn)) / (2.0 * h);
        c.expect(std::abs(fd - mb.tau[d]) <= 1e-6,
                 fmt("log-gradient mismatch %.10g vs tau %.10g, dim %d coord %d", fd, mb.tau[d],
                     dim, d));
      }
    }
  }
}

// ---------------------------------------------------------------------------
// 5. Inverse moments of the estimated channel matrix match their closed
//    forms: E{1/||h_k||^2} = 1/((M-1) sigma_k) per column, and the trace of
//    the inverse Gram of the variance-normalized matrix averages K/(M-K).

void criterion5(Checker& c) {
  const int kk = 10, n_draws = 10000;
  VectorXd alphas(kk);
  for (int k = 0; k < kk; ++k) alphas[k] = 900.0 * std::pow(0.65, k);  // spread of gains
  const VectorXd pp = VectorXd::Constant(kk, 0.02);
  const auto st = chan::mmse_stats_all(alphas, kk, pp);

  for (int m : {50, 100}) {
    Rng rng(derive_seed(2005, {static_cast<std::uint64_t>(m)}));
    VectorXd inv_norm = VectorXd::Zero(kk);
    double tr_sum = 0.0;
    MatrixXcd h_hat(m, kk);
    for (int t = 0; t < n_draws; ++t) {
      const MatrixXcd h = chan::draw_true_channels(rng, alphas, m);
      for (int k = 0; k < kk; ++k) {
        h_hat.col(k) = chan::simulate_pilot_estimation(rng, h.col(k), alphas[k], kk, pp[k]).first;
        inv_norm[k] += 1.0 / h_hat.col(k).squaredNorm();
      }
      const MatrixXcd breve =
          h_hat *
          st.sigma.cwiseSqrt().cwiseInverse().cast<std::complex<double>>().asDiagonal();
      const MatrixXcd gram = breve.adjoint() * breve;
      tr_sum += gram.inverse().trace().real();
    }
    for (int k = 0; k < kk; ++k) {
      const double ratio = inv_norm[k] / n_draws * (m - 1) * st.sigma[k];
      c.expect(std::abs(ratio - 1.0) < 0.02,
               fmt("M=%d device %d: E{1/|h|^2} off by %.4f", m, k + 1, ratio - 1.0));
    }
    const double tr_ratio = tr_sum / n_draws * (m - kk) / kk;
    std::fprintf(stderr, "  M=%d inverse-Gram trace ratio %.5f\n", m, tr_ratio);
    c.expect(std::abs(tr_ratio - 1.0) < 0.02,
             fmt("M=%d: inverse-Gram trace off by %.4f", m, tr_ratio - 1.0));
  }
}

// ---------------------------------------------------------------------------
// 6. The GP solver itself: toys with known optima, finite-difference checks
//    of the log-domain constraint calculus, and bit-identical reruns.

double lse_local(const Eigen::MatrixXd& rows, const VectorXd& offs, const VectorXd& y,
                 VectorXd* soft = nullptr) {
  const VectorXd z = rows * y + offs;
  const double zmax = z.maxCoeff();
  const Eigen::ArrayXd w = (z.array() - zmax).exp();
  if (soft) *soft = (w / w.sum()).matrix();
  return zmax + std::log(w.sum());
}

void criterion6(Checker& c) {
  {  // single active bound: maximize x with 0.5 x <= 1
    gp::GpProblem p;
    const auto x = p.add_variable("x");
    p.set_objective_exponent(x, 1.0);
    p.add_constraint(gp::Monomial(0.5, x), gp::Monomial(1.0));
    const auto sol = gp::solve(p);
    c.expect(sol.status == gp::SolveStatus::optimal, "toy 1 not optimal");
    c.expect(std::abs(sol.x[x] - 2.0) <= 1e-6, fmt("toy 1: x = %.10f", sol.x[x]));
  }
  gp::GpProblem amgm;  // maximize x1 x2 with x1 + x2 <= 4; optimum (2, 2)
  {
    const auto x1 = amgm.add_variable("x1");
    const auto x2 = amgm.add_variable("x2");
    amgm.set_objective_exponent(x1, 1.0);
    amgm.set_objective_exponent(x2, 1.0);
    amgm.add_constraint(gp::Monomial(1.0, x1) + gp::Monomial(1.0, x2), gp::Monomial(4.0));
    const auto sol = gp::solve(amgm);
    c.expect(sol.status == gp::SolveStatus::optimal, "toy 2 not optimal");
    c.expect(std::abs(sol.log_objective - std::log(4.0)) <= 1e-8,
             fmt("toy 2: log objective %.12f vs %.12f", sol.log_objective, std::log(4.0)));
    c.expect(std::abs(sol.x[0] - 2.0) <= 1e-3 && std::abs(sol.x[1] - 2.0) <= 1e-3,
             fmt("toy 2: x = (%.6f, %.6f)", sol.x[0], sol.x[1]));
  }
  {  // vertex optimum against two simple bounds
    gp::GpProblem p;
    const auto x1 = p.add_variable("x1", 3.0);
    const auto x2 = p.add_variable("x2", 5.0);
    p.set_objective_exponent(x1, 2.0);
    p.set_objective_exponent(x2, 1.0);
    const auto sol = gp::solve(p);
    c.expect(sol.status == gp::SolveStatus::optimal, "toy 3 not optimal");
    c.expect(std::abs(sol.x[x1] / 3.0 - 1.0) <= 1e-6 && std::abs(sol.x[x2] / 5.0 - 1.0) <= 1e-6,
             fmt("toy 3: x = (%.8f, %.8f)", sol.x[x1], sol.x[x2]));
  }

  {  // finite differences of log-sum-exp value, gradient, and Hessian
    Rng rng(derive_seed(2006, {3}));
    gp::GpProblem p;
    const auto x1 = p.add_variable("x1");
    const auto x2 = p.add_variable("x2");
    const auto x3 = p.add_variable("x3");
    p.set_objective_exponent(x1, 1.0);
    auto rand_mono = [&](double lo, double hi) {
      gp::Monomial m(lo + (hi - lo) * rng.uniform());
      for (auto v : {x1, x2, x3}) m.exps[v] = std::round(4.0 * rng.uniform() - 2.0);
      return m;
    };
    for (int i = 0; i < 3; ++i)
      p.add_constraint(rand_mono(0.5, 2.0) + rand_mono(0.1, 1.0) + rand_mono(0.1, 1.0),
                       rand_mono(1.0, 3.0));
    const gp::LogForm lf = gp::log_transform(p);

    const double h = 1e-5;
    for (const auto& lc : lf.cons) {
      for (int trial = 0; trial < 30; ++trial) {
        VectorXd y(3);
        for (int d = 0; d < 3; ++d) y[d] = 2.0 * rng.uniform() - 1.0;
        VectorXd soft;
        lse_local(lc.rows, lc.offs, y, &soft);
        const VectorXd grad = lc.rows.transpose() * soft;
        const Eigen::MatrixXd hess =
            lc.rows.transpose() *
            (Eigen::MatrixXd(soft.asDiagonal()) - soft * soft.transpose()) * lc.rows;
        for (int d = 0; d < 3; ++d) {
          VectorXd up = y, dn = y;
          up[d] += h;
          dn[d] -= h;
          const double fd = (lse_local(lc.rows, lc.offs, up) - lse_local(lc.rows, lc.offs, dn)) /
                            (2.0 * h);
          c.expect(std::abs(fd - grad[d]) <= 1e-6 * std::max(1.0, std::abs(grad[d])),
                   fmt("gradient fd mismatch %.10g vs %.10g", fd, grad[d]));
          VectorXd su, sd;
          lse_local(lc.rows, lc.offs, up, &su);
          lse_local(lc.rows, lc.offs, dn, &sd);
          const VectorXd fd_col =
              (lc.rows.transpose() * su - lc.rows.transpose() * sd) / (2.0 * h);
          for (int e = 0; e < 3; ++e)
            c.expect(std::abs(fd_col[e] - hess(e, d)) <=
                         1e-6 * std::max(1.0, std::abs(hess(e, d))),
                     fmt("hessian fd mismatch %.10g vs %.10g", fd_col[e], hess(e, d)));
        }
      }
    }
  }

  {  // determinism: identical bits across reruns, on a toy and on a real build
    const auto s1 = gp::solve(amgm);
    const auto s2 = gp::solve(amgm);
    c.expect(s1.newton_steps == s2.newton_steps &&
                 std::memcmp(s1.x.data(), s2.x.data(), sizeof(double) * s1.x.size()) == 0,
             "toy rerun differs");

    const Scenario sc = random_scenario(2006, 3, 400.0);
    VectorXd floors(3), w_hat(3);
    for (int k = 0; k < 3; ++k) {
      const auto fp = fbl::FblParams::make(sc.sys.blocklength, 3, sc.devices[k].epsilon);
      floors[k] = fbl::chi_min(fp, sc.devices[k].rate_req);
      w_hat[k] = sc.devices[k].weight;
    }
    const gp::GpProblem p = build_gp_mrc(sc, w_hat, floors);
    const auto a = gp::solve(p);
    const auto b = gp::solve(p);
    c.expect(a.status == gp::SolveStatus::optimal, "allocator GP not optimal");
    c.expect(a.newton_steps == b.newton_steps &&
                 std::memcmp(a.x.data(), b.x.data(), sizeof(double) * a.x.size()) == 0,
             "allocator GP rerun differs");
  }
}

// ---------------------------------------------------------------------------
// Shared by criteria 7 and 8: the score a sweep assigns to one run, i.e. the
// weighted rate sum over devices that actually meet their target.

double zeroed_score(const Scenario& sc, const AllocationResult& res) {
  if (res.status == AllocStatus::infeasible) return 0.0;
  double s = 0.0;
  for (int k = 0; k < sc.k(); ++k) {
    const double req = sc.devices[k].rate_req;
    if (res.rate_lb[k] >= req - 1e-6 * std::max(1.0, req))
      s += sc.devices[k].weight * res.rate_lb[k];
  }
  return s;
}

// 7. Benchmark orderings over random drops at scarce energy budgets: the
//    relaxed bound dominates every instance, joint pilot optimization beats
//    the fixed split (clearly for ZF, mildly for MRC), and the conventional
//    design misses rate targets more often than the proposed one.

void criterion7(Checker& c) {
  const std::vector<double> energies = {0.6, 0.8, 1.0};
  double margin[2] = {0.0, 0.0};
  long conv_claims = 0, conv_viol = 0, prop_claims = 0, prop_viol = 0;

  for (Receiver r : {Receiver::mrc, Receiver::zf}) {
    mc::SweepSpec spec;
    spec.axis = mc::SweepAxis::energy;
    spec.values = energies;
    spec.snapshots = 20;
    spec.receiver = r;
    spec.base_seed = 7001;
    spec.k_devices = 6;
    spec.m_antennas = 100;
    spec.blocklength = 100;
    spec.rate_req = r == Receiver::zf ? 4.0 : 1.0;
    spec.epsilon = 1e-9;
    spec.dist_min_m = 50.0;
    spec.dist_max_m = 500.0;

    for (std::size_t vi = 0; vi < energies.size(); ++vi) {
      double prop_mean = 0.0, fixed_mean = 0.0;
      for (int snap = 0; snap < spec.snapshots; ++snap) {
        const Scenario sc = mc::sweep_scenario(spec, static_cast<int>(vi), snap);
        const AllocationResult prop = optimize(sc, r);
        const AllocationResult conv = run_baseline(sc, r, Baseline::conventional);
        const AllocationResult fixp = run_baseline(sc, r, Baseline::fixed_pilot);

        // (a) the Shannon-relaxation score bounds the proposed Shannon sum
        if (prop.status != AllocStatus::infeasible) {
          c.expect(conv.status != AllocStatus::infeasible,
                   fmt("%s E=%.1f snap %d: relaxation infeasible where proposed is not",
                       to_string(r), energies[vi], snap));
          c.expect(conv.weighted_shannon >=
                       prop.weighted_shannon - 1e-6 * std::max(1.0, prop.weighted_shannon),
                   fmt("%s E=%.1f snap %d: upper %.8f below proposed shannon %.8f", to_string(r),
                       energies[vi], snap, conv.weighted_shannon, prop.weighted_shannon));
        }

        prop_mean += zeroed_score(sc, prop) / spec.snapshots;
        fixed_mean += zeroed_score(sc, fixp) / spec.snapshots;

        // (c) target misses among devices each algorithm claims to serve
        for (const auto* res : {&prop, &conv}) {
          if (res->status == AllocStatus::infeasible) continue;
          long& claims = res == &prop ? prop_claims : conv_claims;
          long& viol = res == &prop ? prop_viol : conv_viol;
          claims += sc.k();
          for (int k = 0; k < sc.k(); ++k) {
            const double req = sc.devices[k].rate_req;
            if (res->rate_lb[k] < req - 1e-6 * std::max(1.0, req)) ++viol;
          }
        }
      }
      std::fprintf(stderr, "  %s E=%.1f: proposed mean %.4f, fixed-pilot mean %.4f\n",
                   to_string(r), energies[vi], prop_mean, fixed_mean);
      // (b) joint optimization at least matches the fixed split at E <= 1
      if (r == Receiver::zf)
        c.expect(prop_mean >= fixed_mean,
                 fmt("zf E=%.1f: proposed mean %.6f below fixed-pilot %.6f", energies[vi],
                     prop_mean, fixed_mean));
      margin[r == Receiver::zf ? 1 : 0] += (prop_mean - fixed_mean) / energies.size();
    }
  }

  std::fprintf(stderr, "  margins over fixed pilots: mrc %.4f, zf %.4f\n", margin[0], margin[1]);
  c.expect(margin[1] > margin[0],
           fmt("zf margin %.6f not above mrc margin %.6f", margin[1], margin[0]));

  const double conv_freq = conv_claims ? double(conv_viol) / conv_claims : 0.0;
  const double prop_freq = prop_claims ? double(prop_viol) / prop_claims : 0.0;
  std::fprintf(stderr, "  violation frequency: conventional %.4f (%ld/%ld), proposed %.4f\n",
               conv_freq, conv_viol, conv_claims, prop_freq);
  c.expect(conv_freq > prop_freq,
           fmt("conventional violation frequency %.6f not above proposed %.6f", conv_freq,
               prop_freq));
}

// ---------------------------------------------------------------------------
// 8. Longer frames shrink the gap to the Shannon-relaxation upper bound. The
//    per-symbol energy budget is held constant so only the blocklength
//    penalty varies.

void criterion8(Checker& c) {
  for (Receiver r : {Receiver::mrc, Receiver::zf}) {
    double gap[2];
    const int ls[2] = {50, 150};
    for (int li = 0; li < 2; ++li) {
      mc::SweepSpec spec;
      spec.axis = mc::SweepAxis::blocklength;
      spec.values = {double(ls[li])};
      spec.snapshots = 20;
      spec.receiver = r;
      spec.base_seed = 7008;
      spec.k_devices = 6;
      spec.m_antennas = 100;
      spec.energy = 0.02 * ls[li];
      spec.rate_req = r == Receiver::zf ? 4.0 : 2.0;
      spec.epsilon = 1e-9;
      spec.dist_min_m = 50.0;
      spec.dist_max_m = 500.0;

      double prop_mean = 0.0, upper_mean = 0.0;
      for (int snap = 0; snap < spec.snapshots; ++snap) {
        const Scenario sc = mc::sweep_scenario(spec, 0, snap);
        prop_mean += zeroed_score(sc, optimize(sc, r)) / spec.snapshots;
        const AllocationResult up = run_baseline(sc, r, Baseline::upper_bound);
        upper_mean +=
            (up.status == AllocStatus::infeasible ? 0.0 : up.weighted_sum) / spec.snapshots;
      }
      c.expect(upper_mean > 0.0, fmt("%s L=%d: upper bound mean is zero", to_string(r), ls[li]));
      gap[li] = (upper_mean - prop_mean) / std::max(upper_mean, 1e-12);
      std::fprintf(stderr, "  %s L=%d: proposed %.4f, upper %.4f, relative gap %.4f\n",
                   to_string(r), ls[li], prop_mean, upper_mean, gap[li]);
    }
    c.expect(gap[1] < gap[0], fmt("%s: gap %.4f at L=150 not below %.4f at L=50", to_string(r),
                                  gap[1], gap[0]));
  }
}

const char* kDescription[9] = {
    "",
    "ergodic-rate lower bound holds empirically and tightens with antennas",
    "outer loop ascends monotonically and converges within ten rounds",
    "two-device optima match an independent grid search within 1%",
    "surrogate bounding lemmas hold over random samples with tight anchors",
    "inverse channel moments match their closed forms within 2%",
    "GP solver: exact toys, finite-difference calculus, bit-identical reruns",
    "benchmark orderings hold over random drops at scarce energy",
    "gap to the upper bound shrinks as the frame grows",
};

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
    return 2;
  }
  const int n = std::atoi(argv[1]);
  if (n < 1 || n > 8) {
    std::fprintf(stderr, "usage: acceptance <criterion 1..8>\n");
    return 2;
  }

  Checker c;
  switch (n) {
    case 1: criterion1(c); break;
    case 2: criterion2(c); break;
    case 3: criterion3(c); break;
    case 4: criterion4(c); break;
    case 5: criterion5(c); break;
    case 6: criterion6(c); break;
    case 7: criterion7(c); break;
    case 8: criterion8(c); break;
  }
  if (c.failures > 24)
    std::fprintf(stderr, "  (%d further failed checks suppressed)\n", c.failures - 24);
  std::printf("[%s] criterion %d: %s\n", c.ok ? "PASS" : "FAIL", n, kDescription[n]);
  return c.ok ? 0 : 1;
}
