#include "fblpower/allocator.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fblpower/chanmodel.hpp"
#include "fblpower/fbl_rate.hpp"
#include "json.hpp"

namespace fblpower {
namespace {

using json = nlohmann::json;
using Eigen::VectorXd;

// The exact pilot-product expansion grows as 2^K; beyond this the GP would
// need gigabytes just to hold the constraint rows.
constexpr int kMaxZfDevices = 12;

constexpr double kFeasSlack = 1e-9;    // phi >= 1 - slack counts as feasible
constexpr double kInterior = 1e-6;     // pulls warm starts off active constraints
constexpr double kChiBackoff = 0.999;  // exponent shrinking chi toward its floor
constexpr double kAcceptViolation = 1e-8;  // worst GP violation we tolerate
constexpr double kAnchorTol = 1e-4;        // zero-forcing feasibility fixed point
constexpr int kAnchorCap = 20;
constexpr double kAnchorDrift = 1e-5;  // pilot movement that forces a re-anchored solve

std::string pp_name(int k) { return "pp" + std::to_string(k + 1); }
std::string pd_name(int k) { return "pd" + std::to_string(k + 1); }
std::string chi_name(int k) { return "chi" + std::to_string(k + 1); }

gp::Monomial mono(double c, std::initializer_list<std::pair<gp::VarId, double>> vars) {
  gp::Monomial m(c);
  for (const auto& [v, e] : vars) m *= gp::Monomial(1.0, v, e);
  return m;
}

// Everything the optimizer derives once from a scenario. The finite
// blocklength parameters are kept per device (epsilon may differ); the
// Shannon variants drive the upper bound and the rate_shannon report.
struct Model {
  int m = 0;
  int kk = 0;
  int ll = 0;
  double beta = 0.0;
  VectorXd alpha, w, energy, rate_req;
  VectorXd a;          // dispersion coefficients; all zero in Shannon mode
  VectorXd chi_floor;  // SINR thresholds implied by the rate targets
  std::vector<fbl::FblParams> fp;          // true finite-blocklength parameters
  std::vector<fbl::FblParams> fp_shannon;  // a = 0 twins
};

Model make_model(const Scenario& sc, bool shannon) {
  Model md;
  md.m = sc.sys.m_antennas;
  md.kk = sc.sys.k_devices;
  md.ll = sc.sys.blocklength;
  md.beta = sc.sys.pilot_overhead();
  md.alpha = sc.alphas();
  md.w = sc.weights();
  md.energy = sc.energies();
  md.rate_req.resize(md.kk);
  md.a.resize(md.kk);
  md.chi_floor.resize(md.kk);
  for (int k = 0; k < md.kk; ++k) {
    const auto& d = sc.devices[k];
    md.rate_req[k] = d.rate_req;
    md.fp.push_back(fbl::FblParams::make(md.ll, md.kk, d.epsilon));
    md.fp_shannon.push_back(fbl::FblParams::shannon(md.ll, md.kk));
    const fbl::FblParams& active = shannon ? md.fp_shannon[k] : md.fp[k];
    md.a[k] = active.a;
    md.chi_floor[k] = fbl::chi_min(active, d.rate_req);
  }
  return md;
}

// Shared energy rows: K pp_k + (L - K) pd_k <= E_k.
void add_energy(gp::GpProblem& p, const Model& md, const std::vector<gp::VarId>& pp,
                const std::vector<gp::VarId>& pd) {
  for (int k = 0; k < md.kk; ++k) {
    gp::Posynomial lhs = mono(static_cast<double>(md.kk), {{pp[k], 1.0}}) +
                         mono(static_cast<double>(md.ll - md.kk), {{pd[k], 1.0}});
    p.add_constraint(lhs, gp::Monomial(md.energy[k]), "energy" + std::to_string(k + 1));
  }
}

// Maximal-ratio combining SINR constraint for device k, cleared of fractions:
//   s_k [ sum_{i!=k} a_i a_k K pp_k pd_i + sum_i a_i pd_i + a_k K pp_k + 1 ]
//     <= (M-1) K a_k^2 pp_k pd_k
// where s_k is the chi (or phi-scaled) monomial passed in. Dividing both sides
// by 1 + a_k K pp_k recovers chi_k <= closed-form SINR exactly, because the
// other devices' estimate and error variances add back to a_i.
void add_sinr_mrc(gp::GpProblem& p, const Model& md, int k, const gp::Monomial& s,
                  const std::vector<gp::VarId>& pp, const std::vector<gp::VarId>& pd) {
  const double ak = md.alpha[k];
  const double kd = static_cast<double>(md.kk);
  gp::Posynomial lhs;
  for (int i = 0; i < md.kk; ++i)
    if (i != k) lhs += s * mono(md.alpha[i] * ak * kd, {{pp[k], 1.0}, {pd[i], 1.0}});
  for (int i = 0; i < md.kk; ++i) lhs += s * mono(md.alpha[i], {{pd[i], 1.0}});
  lhs += s * mono(ak * kd, {{pp[k], 1.0}});
  lhs += gp::Posynomial(s);
  gp::Monomial rhs = mono((md.m - 1) * kd * ak * ak, {{pp[k], 1.0}, {pd[k], 1.0}});
  p.add_constraint(lhs, rhs, "sinr" + std::to_string(k + 1));
}

// Pieces of the zero-forcing constraint shared across devices:
// one_plus[i] = 1 + a_i K pp_i and
// inner = sum_i a_i pd_i prod_{j!=i} one_plus[j] + prod_i one_plus[i],
// the common interference-plus-noise numerator after clearing all the
// estimation denominators.
struct ZfParts {
  std::vector<gp::Posynomial> one_plus;
  gp::Posynomial inner;
};

ZfParts zf_parts(const Model& md, const std::vector<gp::VarId>& pp,
                 const std::vector<gp::VarId>& pd) {
  const double kd = static_cast<double>(md.kk);
  ZfParts z;
  for (int i = 0; i < md.kk; ++i)
    z.one_plus.push_back(gp::Monomial(1.0) + mono(md.alpha[i] * kd, {{pp[i], 1.0}}));
  auto prod_except = [&](int skip) {
    gp::Posynomial out(1.0);
    for (int j = 0; j < md.kk; ++j)
      if (j != skip) out = out * z.one_plus[j];
    return out;
  };
  z.inner = prod_except(-1);
  for (int i = 0; i < md.kk; ++i)
    z.inner += mono(md.alpha[i], {{pd[i], 1.0}}) * prod_except(i);
  return z;
}

// Zero-forcing SINR constraint for device k:
//   s_k (1 + a_k K pp_k) inner <= (M-K) a_k^2 K pp_k pd_k
//                                  * lambda prod_i (a_i K pp_i)^tau_i
// The true right side carries prod_i (1 + a_i K pp_i), which is not a
// monomial; the anchored lower bound replaces it, so the constraint is a
// conservative tightening that is exact at the anchor powers.
void add_sinr_zf(gp::GpProblem& p, const Model& md, int k, const gp::Monomial& s,
                 const ZfParts& z, const approx::MonomialBound& bound,
                 const std::vector<gp::VarId>& pp, const std::vector<gp::VarId>& pd) {
  const double ak = md.alpha[k];
  const double kd = static_cast<double>(md.kk);
  gp::Posynomial lhs = (gp::Posynomial(s) * z.one_plus[k]) * z.inner;
  gp::Monomial rhs((md.m - md.kk) * kd * ak * ak * bound.lambda);
  rhs *= gp::Monomial(1.0, pp[k], 1.0);
  rhs *= gp::Monomial(1.0, pd[k], 1.0);
  for (int i = 0; i < md.kk; ++i)
    rhs *= gp::Monomial(std::pow(md.alpha[i] * kd, bound.tau[i]), pp[i], bound.tau[i]);
  p.add_constraint(lhs, rhs, "sinr" + std::to_string(k + 1));
}

void check_zf_size(const Model& md, const approx::MonomialBound& bound) {
  if (md.kk > kMaxZfDevices)
    throw std::invalid_argument("zero-forcing GP: exact product expansion supports at most " +
                                std::to_string(kMaxZfDevices) + " devices, got " +
                                std::to_string(md.kk));
  if (bound.tau.size() != md.kk)
    throw std::invalid_argument("zero-forcing GP: pilot bound has " +
                                std::to_string(bound.tau.size()) + " exponents for " +
                                std::to_string(md.kk) + " devices");
}

struct VarSet {
  std::vector<gp::VarId> pp, pd, chi;
  gp::VarId phi = -1;
};

// Adds pilot/data power variables, then either per-device chi or a single phi.
VarSet add_vars(gp::GpProblem& p, int kk, bool with_pilots, bool feasibility) {
  VarSet v;
  if (with_pilots)
    for (int k = 0; k < kk; ++k) v.pp.push_back(p.add_variable(pp_name(k)));
  for (int k = 0; k < kk; ++k) v.pd.push_back(p.add_variable(pd_name(k)));
  if (feasibility) {
    v.phi = p.add_variable("phi");
    p.set_objective_exponent(v.phi, 1.0);
  } else {
    for (int k = 0; k < kk; ++k) v.chi.push_back(p.add_variable(chi_name(k)));
  }
  return v;
}

void add_chi_floors(gp::GpProblem& p, const Model& md, const std::vector<gp::VarId>& chi) {
  for (int k = 0; k < md.kk; ++k)
    if (md.chi_floor[k] > 0.0)
      p.add_constraint(gp::Monomial(md.chi_floor[k], chi[k], -1.0), gp::Monomial(1.0),
                       "floor" + std::to_string(k + 1));
}

gp::GpProblem build_main_gp(const Model& md, Receiver r, const VectorXd& w_hat,
                            const VectorXd& chi_floor, const approx::MonomialBound* bound) {
  gp::GpProblem p;
  VarSet v = add_vars(p, md.kk, /*with_pilots=*/true, /*feasibility=*/false);
  for (int k = 0; k < md.kk; ++k) p.set_objective_exponent(v.chi[k], w_hat[k]);
  if (r == Receiver::mrc) {
    for (int k = 0; k < md.kk; ++k)
      add_sinr_mrc(p, md, k, gp::Monomial(1.0, v.chi[k]), v.pp, v.pd);
  } else {
    check_zf_size(md, *bound);
    const ZfParts z = zf_parts(md, v.pp, v.pd);
    for (int k = 0; k < md.kk; ++k)
      add_sinr_zf(p, md, k, gp::Monomial(1.0, v.chi[k]), z, *bound, v.pp, v.pd);
  }
  Model with_floor = md;
  with_floor.chi_floor = chi_floor;
  add_chi_floors(p, with_floor, v.chi);
  add_energy(p, md, v.pp, v.pd);
  return p;
}

// Fixed-pilot variants: the pilot powers are constants, so the estimation
// statistics collapse to numbers and the SINR constraints need no clearing
// tricks; for zero-forcing they are exact (no pilot-product bound).
//   mrc: s_k [ sum_{i!=k} a_i pd_i + delta_k pd_k + 1 ] <= (M-1) sigma_k pd_k
//   zf:  s_k [ sum_i delta_i pd_i + 1 ] <= (M-K) sigma_k pd_k
gp::GpProblem build_fixed_gp(const Model& md, Receiver r, const VectorXd& p_pilot,
                             const VectorXd& w_hat, bool feasibility) {
  const chan::EstimationStats st = chan::mmse_stats_all(md.alpha, md.kk, p_pilot);
  gp::GpProblem p;
  VarSet v = add_vars(p, md.kk, /*with_pilots=*/false, feasibility);
  if (!feasibility)
    for (int k = 0; k < md.kk; ++k) p.set_objective_exponent(v.chi[k], w_hat[k]);
  for (int k = 0; k < md.kk; ++k) {
    gp::Monomial s = feasibility ? gp::Monomial(md.chi_floor[k], v.phi)
                                 : gp::Monomial(1.0, v.chi[k]);
    if (feasibility && !(md.chi_floor[k] > 0.0)) continue;
    gp::Posynomial lhs;
    if (r == Receiver::mrc) {
      for (int i = 0; i < md.kk; ++i)
        if (i != k) lhs += s * mono(md.alpha[i], {{v.pd[i], 1.0}});
      lhs += s * mono(st.delta[k], {{v.pd[k], 1.0}});
    } else {
      for (int i = 0; i < md.kk; ++i) lhs += s * mono(st.delta[i], {{v.pd[i], 1.0}});
    }
    lhs += gp::Posynomial(s);
    const double gain = (r == Receiver::mrc ? md.m - 1 : md.m - md.kk) * st.sigma[k];
    p.add_constraint(lhs, mono(gain, {{v.pd[k], 1.0}}), "sinr" + std::to_string(k + 1));
  }
  if (!feasibility) add_chi_floors(p, md, v.chi);
  for (int k = 0; k < md.kk; ++k) {
    const double remaining = md.energy[k] - md.kk * p_pilot[k];
    if (!(remaining > 0.0))
      throw std::invalid_argument("fixed-pilot GP: pilots exhaust device " +
                                  std::to_string(k + 1) + "'s energy budget");
    p.add_constraint(mono(static_cast<double>(md.ll - md.kk), {{v.pd[k], 1.0}}),
                     gp::Monomial(remaining), "energy" + std::to_string(k + 1));
  }
  return p;
}

// ---- engine -----------------------------------------------------------

struct EngineCfg {
  bool shannon = false;      // a = 0 everywhere: the Shannon upper bound
  bool fixed_pilot = false;  // pilots pinned at E/L, only payload optimized
};

VectorXd sinr_at(const Model& md, Receiver r, const VectorXd& pp, const VectorXd& pd) {
  const chan::EstimationStats st = chan::mmse_stats_all(md.alpha, md.kk, pp);
  return r == Receiver::mrc ? fbl::sinr_lb_mrc(pd, st.sigma, st.delta, md.m)
                            : fbl::sinr_lb_zf(pd, st.sigma, st.delta, md.m);
}

VectorXd pilot_anchor(const Model& md, const VectorXd& pp) {
  return (md.alpha.array() * md.kk * pp.array()).matrix();
}

// Largest chi_k (or phi) the constraint admits at the given powers; every
// left-side term carries the variable to the first power and the right side
// none, so the bound is rhs/lhs evaluated with that variable set to 1.
double implied_bound(const gp::Constraint& c, gp::VarId v, VectorXd x) {
  x[v] = 1.0;
  return gp::eval(c.rhs, x) / gp::eval(c.lhs, x);
}

struct FeasOut {
  double phi = 0.0;
  VectorXd pp, pd;
  gp::SolveStatus status = gp::SolveStatus::optimal;
  double violation = 0.0;
};

// Solves the phi-maximization that decides whether the rate targets are
// jointly achievable; the maximizing powers seed the main loop. For
// zero-forcing the pilot-product anchor is iterated to a fixed point.
FeasOut run_feasibility(const Scenario& sc, const Model& md, Receiver r, const EngineCfg& cfg,
                        double gp_tol) {
  const int K = md.kk;
  FeasOut out;
  out.pp = (md.energy / md.ll) * (1.0 - kInterior);
  out.pd = out.pp;
  if (cfg.fixed_pilot) out.pp = md.energy / md.ll;

  if (md.chi_floor.maxCoeff() <= 0.0) {
    out.phi = std::numeric_limits<double>::infinity();
    return out;
  }

  const bool iterate_anchor = (r == Receiver::zf && !cfg.fixed_pilot);
  const int rounds = iterate_anchor ? kAnchorCap : 1;
  double phi_prev = -1.0;
  for (int round = 0; round < rounds; ++round) {
    approx::MonomialBound bound;
    gp::GpProblem prob;
    if (cfg.fixed_pilot) {
      prob = build_fixed_gp(md, r, out.pp, VectorXd(), /*feasibility=*/true);
    } else if (r == Receiver::mrc) {
      prob = build_feasibility_gp(sc, r, md.chi_floor);
    } else {
      bound = approx::product_lower(pilot_anchor(md, out.pp));
      prob = build_feasibility_gp(sc, r, md.chi_floor, &bound);
    }

    // Warm start: current powers nudged inside, phi just under the smallest
    // bound its constraints admit there.
    VectorXd x0 = VectorXd::Ones(prob.n_vars());
    const gp::VarId phi_id = prob.find_variable("phi");
    for (int k = 0; k < K; ++k) {
      if (!cfg.fixed_pilot) x0[prob.find_variable(pp_name(k))] = out.pp[k] * (1.0 - kInterior);
      x0[prob.find_variable(pd_name(k))] = out.pd[k] * (1.0 - kInterior);
    }
    double phi_cap = std::numeric_limits<double>::infinity();
    for (const auto& c : prob.constraints()) {
      if (c.label.rfind("sinr", 0) != 0) continue;
      phi_cap = std::min(phi_cap, implied_bound(c, phi_id, x0));
    }
    x0[phi_id] = std::max(phi_cap * (1.0 - kInterior), 1e-12);

    gp::SolveOptions sop;
    sop.tol = gp_tol;
    sop.warm_start = x0;
    const gp::GpSolution sol = gp::solve(prob, sop);
    if (sol.max_violation > kAcceptViolation)
      throw std::runtime_error(std::string("feasibility GP (") + to_string(r) +
                               ") ended " + gp::to_string(sol.status) + " with violation " +
                               std::to_string(sol.max_violation));
    out.status = sol.status;
    out.violation = sol.max_violation;
    out.phi = sol.x[phi_id];
    for (int k = 0; k < K; ++k) {
      if (!cfg.fixed_pilot) out.pp[k] = sol.x[prob.find_variable(pp_name(k))];
      out.pd[k] = sol.x[prob.find_variable(pd_name(k))];
    }
    if (phi_prev > 0.0 && std::abs(out.phi - phi_prev) <= kAnchorTol * std::abs(out.phi)) break;
    phi_prev = out.phi;
  }
  return out;
}

double objective_at(const Model& md, const VectorXd& gamma) {
  return approx::true_objective(md.w, md.a, md.beta, gamma);
}

AllocationResult engine(const Scenario& sc, Receiver r, const AllocateOptions& opts,
                        const EngineCfg& cfg) {
  validate(sc);
  const Model md = make_model(sc, cfg.shannon);
  const int K = md.kk;
  using clock = std::chrono::steady_clock;
  auto mark = clock::now();
  auto take_ms = [&mark] {
    const auto now = clock::now();
    const double ms = std::chrono::duration<double, std::milli>(now - mark).count();
    mark = now;
    return ms;
  };

  AllocationResult out;
  const FeasOut fs = run_feasibility(sc, md, r, cfg, opts.gp_tol);
  out.phi = fs.phi;

  VectorXd pp = fs.pp, pd = fs.pd;
  VectorXd gamma = sinr_at(md, r, pp, pd);
  VectorXd chi = gamma;
  double obj = objective_at(md, gamma);
  out.trace.push_back({obj, gamma, fs.status, fs.violation, take_ms()});

  auto finish = [&](AllocStatus status) {
    out.status = status;
    out.allocation = {pp, pd, chi};
    out.gamma = gamma;
    out.rate_lb.resize(K);
    out.rate_shannon.resize(K);
    for (int k = 0; k < K; ++k) {
      out.rate_lb[k] = fbl::rate_lb(gamma[k], md.fp[k]);
      out.rate_shannon[k] = fbl::rate_lb(gamma[k], md.fp_shannon[k]);
    }
    out.weighted_sum = obj;
    out.weighted_shannon = md.w.dot(out.rate_shannon);
    return out;
  };

  if (fs.phi < 1.0 - kFeasSlack) return finish(AllocStatus::infeasible);

  for (int it = 1; it <= opts.max_outer; ++it) {
    const approx::SurrogateWeights sw = approx::surrogate_weights(md.w, md.a, md.beta, gamma);

    // The ZF joint problem re-anchors the pilot-product minorant and
    // re-solves (warm started) until the pilot powers stop moving, so each
    // outer round extracts everything its rate surrogate offers; otherwise
    // the pilot drift throttles the outer steps. One pass everywhere else.
    const bool anchored = !cfg.fixed_pilot && r == Receiver::zf;
    gp::SolveStatus gp_status = gp::SolveStatus::optimal;
    double gp_violation = 0.0;
    for (int round = 0; round < (anchored ? kAnchorCap : 1); ++round) {
      gp::GpProblem prob;
      if (cfg.fixed_pilot) {
        prob = build_fixed_gp(md, r, pp, sw.w_hat, /*feasibility=*/false);
      } else if (r == Receiver::mrc) {
        prob = build_gp_mrc(sc, sw.w_hat, md.chi_floor);
      } else {
        const approx::MonomialBound bound = approx::product_lower(pilot_anchor(md, pp));
        prob = build_gp_zf(sc, sw.w_hat, md.chi_floor, bound);
      }

      // Warm start at the previous powers pulled slightly inside; chi starts
      // just under what each SINR constraint admits there, backed off toward
      // its floor so the floor rows stay slack too.
      VectorXd x0 = VectorXd::Ones(prob.n_vars());
      for (int k = 0; k < K; ++k) {
        if (!cfg.fixed_pilot) x0[prob.find_variable(pp_name(k))] = pp[k] * (1.0 - kInterior);
        x0[prob.find_variable(pd_name(k))] = pd[k] * (1.0 - kInterior);
      }
      for (int k = 0; k < K; ++k) {
        const gp::VarId ck = prob.find_variable(chi_name(k));
        const double b = implied_bound(prob.constraints()[k], ck, x0);
        const double t = md.chi_floor[k];
        double c0 = (t > 0.0 && b > t) ? t * std::pow(b / t, kChiBackoff)
                                       : std::max(b * (1.0 - kInterior), 1e-12);
        x0[ck] = c0;
      }

      gp::SolveOptions sop;
      sop.tol = opts.gp_tol;
      sop.warm_start = x0;
      const gp::GpSolution sol = gp::solve(prob, sop);
      if (sol.max_violation > kAcceptViolation)
        throw std::runtime_error(std::string(to_string(r)) + " outer iteration " +
                                 std::to_string(it) + ": gp solve ended " +
                                 gp::to_string(sol.status) + " with violation " +
                                 std::to_string(sol.max_violation));
      gp_status = sol.status;
      gp_violation = sol.max_violation;

      double drift = 0.0;
      for (int k = 0; k < K; ++k) {
        if (!cfg.fixed_pilot) {
          const double next = sol.x[prob.find_variable(pp_name(k))];
          drift = std::max(drift, std::abs(next / pp[k] - 1.0));
          pp[k] = next;
        }
        pd[k] = sol.x[prob.find_variable(pd_name(k))];
        chi[k] = sol.x[prob.find_variable(chi_name(k))];
      }
      if (!anchored || drift <= kAnchorDrift) break;
    }

    const VectorXd anchors = gamma;
    gamma = sinr_at(md, r, pp, pd);
    const double obj_new = objective_at(md, gamma);
    out.trace.push_back({obj_new, anchors, gp_status, gp_violation, take_ms()});

    const double rel = std::abs(obj_new - obj) / std::max(std::abs(obj_new), 1e-300);
    obj = obj_new;
    if (rel < opts.xi) return finish(AllocStatus::converged);
  }
  return finish(AllocStatus::max_iter);
}

json vec_to_json(const VectorXd& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

VectorXd vec_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument("allocation: '" + what + "' must be an array");
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw std::invalid_argument("allocation: '" + what + "' entries must be numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

}  // namespace

const char* to_string(Receiver r) { return r == Receiver::mrc ? "mrc" : "zf"; }

const char* to_string(AllocStatus s) {
  switch (s) {
    case AllocStatus::converged: return "converged";
    case AllocStatus::infeasible: return "infeasible";
    case AllocStatus::max_iter: return "max_iter";
  }
  return "?";
}

const char* to_string(Baseline b) {
  switch (b) {
    case Baseline::upper_bound: return "upper_bound";
    case Baseline::conventional: return "conventional";
    case Baseline::fixed_pilot: return "fixed_pilot";
  }
  return "?";
}

gp::GpProblem build_gp_mrc(const Scenario& sc, const Eigen::VectorXd& w_hat,
                           const Eigen::VectorXd& chi_floor) {
  const Model md = make_model(sc, /*shannon=*/false);
  return build_main_gp(md, Receiver::mrc, w_hat, chi_floor, nullptr);
}

gp::GpProblem build_gp_zf(const Scenario& sc, const Eigen::VectorXd& w_hat,
                          const Eigen::VectorXd& chi_floor,
                          const approx::MonomialBound& pilot_bound) {
  const Model md = make_model(sc, /*shannon=*/false);
  return build_main_gp(md, Receiver::zf, w_hat, chi_floor, &pilot_bound);
}

gp::GpProblem build_feasibility_gp(const Scenario& sc, Receiver receiver,
                                   const Eigen::VectorXd& chi_floor,
                                   const approx::MonomialBound* pilot_bound) {
  const Model md = make_model(sc, /*shannon=*/false);
  gp::GpProblem p;
  VarSet v = add_vars(p, md.kk, /*with_pilots=*/true, /*feasibility=*/true);
  if (receiver == Receiver::zf) {
    if (pilot_bound == nullptr)
      throw std::invalid_argument("zero-forcing feasibility GP needs a pilot bound");
    check_zf_size(md, *pilot_bound);
  }
  const ZfParts z = receiver == Receiver::zf ? zf_parts(md, v.pp, v.pd) : ZfParts{};
  for (int k = 0; k < md.kk; ++k) {
    if (!(chi_floor[k] > 0.0)) continue;  // no rate target, no constraint
    gp::Monomial s(chi_floor[k], v.phi);
    if (receiver == Receiver::mrc)
      add_sinr_mrc(p, md, k, s, v.pp, v.pd);
    else
      add_sinr_zf(p, md, k, s, z, *pilot_bound, v.pp, v.pd);
  }
  add_energy(p, md, v.pp, v.pd);
  return p;
}

AllocationResult optimize(const Scenario& sc, Receiver receiver, const AllocateOptions& opts) {
  return engine(sc, receiver, opts, EngineCfg{});
}

AllocationResult run_baseline(const Scenario& sc, Receiver receiver, Baseline kind,
                              const AllocateOptions& opts) {
  switch (kind) {
    case Baseline::upper_bound: {
      EngineCfg cfg;
      cfg.shannon = true;
      return engine(sc, receiver, opts, cfg);
    }
    case Baseline::conventional: {
      // Shannon-designed powers deployed under the finite-blocklength truth:
      // devices whose achieved lower bound misses their target are muted and
      // contribute nothing to the operating score.
      EngineCfg cfg;
      cfg.shannon = true;
      AllocationResult r = engine(sc, receiver, opts, cfg);
      double score = 0.0;
      const VectorXd w = sc.weights();
      for (int k = 0; k < r.rate_lb.size(); ++k)
        if (r.rate_lb[k] >= sc.devices[k].rate_req) score += w[k] * r.rate_lb[k];
      r.weighted_sum = score;
      return r;
    }
    case Baseline::fixed_pilot: {
      EngineCfg cfg;
      cfg.fixed_pilot = true;
      return engine(sc, receiver, opts, cfg);
    }
  }
  throw std::invalid_argument("run_baseline: unknown baseline");
}

std::string allocation_to_json(const AllocationResult& r) {
  json j;
  j["status"] = to_string(r.status);
  j["phi"] = r.phi;
  j["weighted_sum"] = r.weighted_sum;
  j["weighted_shannon"] = r.weighted_shannon;
  j["allocation"] = {{"p_pilot", vec_to_json(r.allocation.p_pilot)},
                     {"p_data", vec_to_json(r.allocation.p_data)},
                     {"chi", vec_to_json(r.allocation.chi)}};
  j["gamma"] = vec_to_json(r.gamma);
  j["rate_lb"] = vec_to_json(r.rate_lb);
  j["rate_shannon"] = vec_to_json(r.rate_shannon);
  j["trace"] = json::array();
  for (const auto& step : r.trace)
    j["trace"].push_back({{"objective", step.objective},
                          {"anchors", vec_to_json(step.anchors)},
                          {"gp_status", gp::to_string(step.gp_status)},
                          {"gp_violation", step.gp_violation},
                          {"wall_ms", step.wall_ms}});
  return j.dump(2) + "\n";
}

PowerAllocation load_allocation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("allocation: cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("allocation: JSON parse error in '" + path + "': " + e.what());
  }
  const json& a = j.contains("allocation") ? j["allocation"] : j;
  if (!a.contains("p_pilot") || !a.contains("p_data"))
    throw std::invalid_argument("allocation: missing 'p_pilot' or 'p_data' array");
  PowerAllocation pa;
  pa.p_pilot = vec_from_json(a["p_pilot"], "p_pilot");
  pa.p_data = vec_from_json(a["p_data"], "p_data");
  if (pa.p_pilot.size() != pa.p_data.size())
    throw std::invalid_argument("allocation: 'p_pilot' and 'p_data' sizes differ");
  if (a.contains("chi")) pa.chi = vec_from_json(a["chi"], "chi");
  for (int k = 0; k < pa.p_pilot.size(); ++k)
    if (!(pa.p_pilot[k] > 0.0) || !(pa.p_data[k] > 0.0))
      throw std::invalid_argument("allocation: powers must be > 0");
  return pa;
}

}  // namespace fblpower
