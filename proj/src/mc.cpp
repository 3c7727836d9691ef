#include "fblpower/mc.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fblpower/chanmodel.hpp"
#include "fblpower/fbl_rate.hpp"
#include "fblpower/rng.hpp"
#include "json.hpp"

namespace fblpower::mc {
namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXd;

constexpr double kCombinerResidual = 1e-8;  // max-norm tolerance on A^H Hhat = I
constexpr int kRedrawCap = 50;              // consecutive singular draws per trial
constexpr double kZeroSlack = 1e-6;  // solver slack absorbed before a rate counts as violated

// Runs fn(begin, end) over contiguous chunks of [0, total) on `threads`
// workers. Exceptions are captured and the first one rethrown after join, so
// a failing chunk cannot terminate the process.
template <typename Fn>
void parallel_chunks(int total, int threads, Fn fn) {
  threads = std::max(1, std::min(threads, total));
  if (threads == 1) {
    fn(0, total);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  const int per = (total + threads - 1) / threads;
  for (int w = 0; w < threads; ++w) {
    const int begin = w * per;
    const int end = std::min(total, begin + per);
    pool.emplace_back([&, w, begin, end] {
      try {
        if (begin < end) fn(begin, end);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double sq_abs(const std::complex<double>& z) { return std::norm(z); }

}  // namespace

Eigen::VectorXd instantaneous_sinr(const Eigen::MatrixXcd& h_hat,
                                   const Eigen::MatrixXcd& h_tilde,
                                   const Eigen::VectorXd& p_data, Receiver receiver) {
  const int m = static_cast<int>(h_hat.rows());
  const int k = static_cast<int>(h_hat.cols());
  if (h_tilde.rows() != m || h_tilde.cols() != k)
    throw std::invalid_argument("instantaneous_sinr: estimate/error shapes differ");
  if (p_data.size() != k)
    throw std::invalid_argument("instantaneous_sinr: p_data size does not match device count");
  for (int i = 0; i < k; ++i)
    if (!(p_data[i] >= 0.0))
      throw std::invalid_argument("instantaneous_sinr: payload powers must be >= 0");

  MatrixXcd a;
  if (receiver == Receiver::mrc) {
    a = h_hat;
  } else {
    if (m <= k) throw std::invalid_argument("instantaneous_sinr: zero-forcing needs M > K");
    const MatrixXcd gram = h_hat.adjoint() * h_hat;
    const Eigen::LLT<MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("zero-forcing combiner: singular Gram matrix");
    a = h_hat * llt.solve(MatrixXcd::Identity(k, k));
    const double resid = (a.adjoint() * h_hat - MatrixXcd::Identity(k, k)).cwiseAbs().maxCoeff();
    if (!(resid < kCombinerResidual))
      throw std::runtime_error("zero-forcing combiner: singular Gram matrix");
  }

  const MatrixXcd sig = a.adjoint() * h_hat;    // entry (k, i): a_k^H hhat_i
  const MatrixXcd err = a.adjoint() * h_tilde;  // entry (k, i): a_k^H htilde_i
  VectorXd gamma(k);
  for (int kk = 0; kk < k; ++kk) {
    double den = a.col(kk).squaredNorm();
    for (int i = 0; i < k; ++i) {
      if (i != kk) den += p_data[i] * sq_abs(sig(kk, i));
      den += p_data[i] * sq_abs(err(kk, i));
    }
    gamma[kk] = p_data[kk] * sq_abs(sig(kk, kk)) / den;
  }
  return gamma;
}

ErgodicRate empirical_ergodic_rate(const Scenario& sc, const PowerAllocation& alloc,
                                   const McConfig& mc) {
  validate(sc);
  const int k = sc.k();
  if (mc.n_trials < 1) throw std::invalid_argument("empirical_ergodic_rate: n_trials must be >= 1");
  if (alloc.p_pilot.size() != k || alloc.p_data.size() != k)
    throw std::invalid_argument("empirical_ergodic_rate: allocation size does not match K");
  for (int i = 0; i < k; ++i)
    if (!(alloc.p_pilot[i] > 0.0))
      throw std::invalid_argument("empirical_ergodic_rate: pilot powers must be > 0");

  const VectorXd alphas = sc.alphas();
  const double beta = sc.sys.pilot_overhead();
  const int L = sc.sys.blocklength;

  ErgodicRate out;
  const chan::EstimationStats st = chan::mmse_stats_all(alphas, k, alloc.p_pilot);
  const VectorXd gamma_hat = mc.receiver == Receiver::mrc
                                 ? fbl::sinr_lb_mrc(alloc.p_data, st.sigma, st.delta, sc.sys.m_antennas)
                                 : fbl::sinr_lb_zf(alloc.p_data, st.sigma, st.delta, sc.sys.m_antennas);
  out.lower_bound.resize(k);
  for (int i = 0; i < k; ++i)
    out.lower_bound[i] =
        fbl::rate_lb(gamma_hat[i], fbl::FblParams::make(L, k, sc.devices[i].epsilon));

  Eigen::MatrixXd rates(mc.n_trials, k);
  std::vector<int> clamps(mc.n_trials, 0), redraws(mc.n_trials, 0);

  parallel_chunks(mc.n_trials, mc.threads, [&](int begin, int end) {
    for (int t = begin; t < end; ++t) {
      for (int attempt = 0;; ++attempt) {
        Rng rng(derive_seed(mc.base_seed, {static_cast<std::uint64_t>(t),
                                           static_cast<std::uint64_t>(attempt)}));
        const MatrixXcd h = chan::draw_true_channels(rng, alphas, sc.sys.m_antennas);
        MatrixXcd h_hat(sc.sys.m_antennas, k), h_tilde(sc.sys.m_antennas, k);
        for (int i = 0; i < k; ++i) {
          auto [hh, ht] = chan::simulate_pilot_estimation(rng, h.col(i), alphas[i], k,
                                                          alloc.p_pilot[i]);
          h_hat.col(i) = hh;
          h_tilde.col(i) = ht;
        }
        VectorXd gamma;
        try {
          gamma = instantaneous_sinr(h_hat, h_tilde, alloc.p_data, mc.receiver);
        } catch (const std::runtime_error&) {
          ++redraws[t];
          if (attempt + 1 >= kRedrawCap)
            throw std::runtime_error("empirical_ergodic_rate: trial " + std::to_string(t) +
                                     " kept drawing singular combiners");
          continue;
        }
        for (int i = 0; i < k; ++i) {
          double r = fbl::rate_fbl(gamma[i], beta, L, sc.devices[i].epsilon);
          if (r < 0.0) {
            r = 0.0;
            ++clamps[t];
          }
          rates(t, i) = r;
        }
        break;
      }
    }
  });

  // reductions run once, in trial order, independent of the thread split
  out.mean = rates.colwise().mean();
  out.std_err = VectorXd::Zero(k);
  if (mc.n_trials > 1) {
    for (int i = 0; i < k; ++i) {
      const double var =
          (rates.col(i).array() - out.mean[i]).square().sum() / (mc.n_trials - 1);
      out.std_err[i] = std::sqrt(var / mc.n_trials);
    }
  }
  for (int t = 0; t < mc.n_trials; ++t) {
    out.clamped += clamps[t];
    out.redrawn += redraws[t];
  }
  return out;
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::proposed: return "proposed";
    case Algorithm::upper_bound: return "upper_bound";
    case Algorithm::conventional: return "conventional";
    case Algorithm::fixed_pilot: return "fixed_pilot";
  }
  return "?";
}

Algorithm algorithm_from_string(const std::string& s) {
  for (Algorithm a : {Algorithm::proposed, Algorithm::upper_bound, Algorithm::conventional,
                      Algorithm::fixed_pilot})
    if (s == to_string(a)) return a;
  throw std::invalid_argument("unknown algorithm '" + s + "'");
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::energy: return "energy";
    case SweepAxis::device_count: return "device_count";
    case SweepAxis::blocklength: return "blocklength";
  }
  return "?";
}

SweepAxis axis_from_string(const std::string& s) {
  for (SweepAxis a : {SweepAxis::energy, SweepAxis::device_count, SweepAxis::blocklength})
    if (s == to_string(a)) return a;
  throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

namespace {

void validate_spec(const SweepSpec& spec) {
  if (spec.values.empty()) throw std::invalid_argument("sweep: values must be nonempty");
  for (double v : spec.values) {
    if (!(v > 0.0)) throw std::invalid_argument("sweep: values must be positive");
    if (spec.axis != SweepAxis::energy && v != std::floor(v))
      throw std::invalid_argument("sweep: device counts and blocklengths must be integers");
  }
  if (spec.snapshots < 1) throw std::invalid_argument("sweep: snapshots must be >= 1");
  if (!(spec.dist_min_m > 0.0) || !(spec.dist_max_m >= spec.dist_min_m))
    throw std::invalid_argument("sweep: need 0 < dist_min_m <= dist_max_m");
}

AllocationResult run_algorithm(const Scenario& sc, Receiver r, Algorithm a,
                               const AllocateOptions& opts) {
  switch (a) {
    case Algorithm::proposed: return optimize(sc, r, opts);
    case Algorithm::upper_bound: return run_baseline(sc, r, Baseline::upper_bound, opts);
    case Algorithm::conventional: return run_baseline(sc, r, Baseline::conventional, opts);
    case Algorithm::fixed_pilot: return run_baseline(sc, r, Baseline::fixed_pilot, opts);
  }
  throw std::invalid_argument("unknown algorithm");
}

// Snapshot scoring: an infeasible run scores zero with every device counted;
// otherwise devices whose rate misses the target (beyond solver slack) are
// zeroed, except that the upper bound is scored on its own Shannon objective,
// which meets its targets by construction.
std::pair<double, int> score_result(const AllocationResult& res, const Scenario& sc,
                                    Algorithm alg) {
  const int k = sc.k();
  if (res.status == AllocStatus::infeasible) return {0.0, k};
  if (alg == Algorithm::upper_bound) return {res.weighted_sum, 0};
  double score = 0.0;
  int zeroed = 0;
  for (int i = 0; i < k; ++i) {
    const double req = sc.devices[i].rate_req;
    if (res.rate_lb[i] >= req - kZeroSlack * std::max(1.0, req))
      score += sc.devices[i].weight * res.rate_lb[i];
    else
      ++zeroed;
  }
  return {score, zeroed};
}

}  // namespace

Scenario sweep_scenario(const SweepSpec& spec, int value_index, int snapshot) {
  validate_spec(spec);
  if (value_index < 0 || value_index >= static_cast<int>(spec.values.size()))
    throw std::invalid_argument("sweep_scenario: value_index out of range");
  if (snapshot < 0 || snapshot >= spec.snapshots)
    throw std::invalid_argument("sweep_scenario: snapshot out of range");
  const double v = spec.values[value_index];

  Scenario sc;
  sc.sys.m_antennas = spec.m_antennas;
  sc.sys.k_devices =
      spec.axis == SweepAxis::device_count ? static_cast<int>(v) : spec.k_devices;
  sc.sys.blocklength =
      spec.axis == SweepAxis::blocklength ? static_cast<int>(v) : spec.blocklength;
  const double energy = spec.axis == SweepAxis::energy ? v : spec.energy;

  sc.seed = derive_seed(spec.base_seed,
                        {static_cast<std::uint64_t>(value_index), static_cast<std::uint64_t>(snapshot)});
  Rng rng(sc.seed);
  for (int i = 0; i < sc.sys.k_devices; ++i) {
    DeviceParams d;
    d.distance_m = spec.dist_min_m + (spec.dist_max_m - spec.dist_min_m) * rng.uniform();
    d.alpha = derive_alpha(d.distance_m, sc.sys.noise_psd_dbm_hz, sc.sys.bandwidth_hz);
    d.weight = rng.uniform();
    d.epsilon = spec.epsilon;
    d.energy = energy;
    d.rate_req = spec.rate_req;
    sc.devices.push_back(d);
  }
  validate(sc);
  return sc;
}

SweepResult run_sweep(const SweepSpec& spec, const std::vector<Algorithm>& algorithms) {
  validate_spec(spec);
  if (algorithms.empty()) throw std::invalid_argument("sweep: algorithms must be nonempty");

  SweepResult out;
  out.axis = spec.axis;
  const int n_values = static_cast<int>(spec.values.size());
  const int n_algs = static_cast<int>(algorithms.size());
  const int cells = n_values * spec.snapshots;
  out.rows.resize(static_cast<std::size_t>(cells) * n_algs);

  parallel_chunks(cells, spec.threads, [&](int begin, int end) {
    for (int cell = begin; cell < end; ++cell) {
      const int vi = cell / spec.snapshots;
      const int snap = cell % spec.snapshots;
      const Scenario sc = sweep_scenario(spec, vi, snap);
      for (int ai = 0; ai < n_algs; ++ai) {
        const AllocationResult res = run_algorithm(sc, spec.receiver, algorithms[ai], spec.alloc_opts);
        const auto [score, zeroed] = score_result(res, sc, algorithms[ai]);
        SweepRow& row = out.rows[static_cast<std::size_t>(cell) * n_algs + ai];
        row.value = spec.values[vi];
        row.algorithm = algorithms[ai];
        row.snapshot = snap;
        row.weighted_sum = score;
        row.infeasible_count = zeroed;
      }
    }
  });
  return out;
}

std::string SweepResult::csv() const {
  std::string s = "axis,value,algorithm,snapshot,weighted_sum,infeasible_count\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%s,%d,%.10g,%d\n", to_string(axis), r.value,
                  to_string(r.algorithm), r.snapshot, r.weighted_sum, r.infeasible_count);
    s += buf;
  }
  return s;
}

std::string SweepResult::summary_json() const {
  // group rows by (value, algorithm) preserving first-appearance order
  struct Cell {
    double value;
    Algorithm alg;
    std::vector<double> scores;
    double zeroed_sum = 0.0;
  };
  std::vector<Cell> cells;
  for (const auto& r : rows) {
    Cell* c = nullptr;
    for (auto& existing : cells)
      if (existing.value == r.value && existing.alg == r.algorithm) {
        c = &existing;
        break;
      }
    if (c == nullptr) {
      cells.push_back({r.value, r.algorithm, {}, 0.0});
      c = &cells.back();
    }
    c->scores.push_back(r.weighted_sum);
    c->zeroed_sum += r.infeasible_count;
  }

  nlohmann::json j;
  j["axis"] = to_string(axis);
  j["cells"] = nlohmann::json::array();
  for (const auto& c : cells) {
    const int n = static_cast<int>(c.scores.size());
    double mean = 0.0;
    for (double s : c.scores) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : c.scores) var += (s - mean) * (s - mean);
    const double std_err = n > 1 ? std::sqrt(var / (n - 1) / n) : 0.0;
    j["cells"].push_back({{"value", c.value},
                          {"algorithm", to_string(c.alg)},
                          {"snapshots", n},
                          {"mean", mean},
                          {"std_err", std_err},
                          {"mean_zeroed", c.zeroed_sum / n}});
  }
  return j.dump(2) + "\n";
}

}  // namespace fblpower::mc
