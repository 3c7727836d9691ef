#include "fblpower/mc.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "fblpower/chanmodel.hpp"
#include "fblpower/fbl_rate.hpp"
#include "fblpower/rng.hpp"

using namespace fblpower;
using Eigen::MatrixXcd;
using Eigen::VectorXd;

namespace {

Scenario drop_sc(int m, int k, int l, std::vector<double> alpha, double energy, double rate_req,
                 double eps = 1e-9) {
  Scenario sc;
  sc.sys.m_antennas = m;
  sc.sys.k_devices = k;
  sc.sys.blocklength = l;
  for (int i = 0; i < k; ++i) {
    DeviceParams d;
    d.alpha = alpha[i];
    d.weight = 1.0;
    d.energy = energy;
    d.rate_req = rate_req;
    d.epsilon = eps;
    sc.devices.push_back(d);
  }
  return sc;
}

MatrixXcd random_matrix(Rng& rng, int m, int k, double var) {
  MatrixXcd h(m, k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < m; ++i) h(i, j) = rng.cnormal(var);
  return h;
}

}  // namespace

TEST_SUITE("mc_harness") {

TEST_CASE("zero-forcing with a perfect estimate removes all interference") {
  Rng rng(42);
  const int m = 12, k = 3;
  const MatrixXcd h_hat = random_matrix(rng, m, k, 1.0);
  const MatrixXcd h_tilde = MatrixXcd::Zero(m, k);
  VectorXd p(k);
  p << 0.5, 1.25, 2.0;

  const VectorXd gamma = mc::instantaneous_sinr(h_hat, h_tilde, p, Receiver::zf);

  // independent combiner computation through a dense inverse
  const MatrixXcd a = h_hat * (h_hat.adjoint() * h_hat).inverse();
  for (int i = 0; i < k; ++i) {
    CHECK(gamma[i] == doctest::Approx(p[i] / a.col(i).squaredNorm()).epsilon(1e-10));
    CHECK(gamma[i] >= 0.0);
  }
}

TEST_CASE("single-device mrc reduces to the quartic norm formula") {
  Rng rng(7);
  const int m = 16;
  const MatrixXcd h_hat = random_matrix(rng, m, 1, 0.8);
  const MatrixXcd h_tilde = random_matrix(rng, m, 1, 0.2);
  const VectorXd p = VectorXd::Constant(1, 0.7);

  const VectorXd gamma = mc::instantaneous_sinr(h_hat, h_tilde, p, Receiver::mrc);
  const double n2 = h_hat.col(0).squaredNorm();
  const double cross = std::norm((h_hat.col(0).adjoint() * h_tilde.col(0))(0, 0));
  const double expect = 0.7 * n2 * n2 / (0.7 * cross + n2);
  CHECK(gamma[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("mrc matches a hand-rolled evaluation at K=3") {
  Rng rng(99);
  const int m = 10, k = 3;
  const MatrixXcd h_hat = random_matrix(rng, m, k, 1.0);
  const MatrixXcd h_tilde = random_matrix(rng, m, k, 0.3);
  VectorXd p(k);
  p << 0.2, 1.0, 3.0;

  const VectorXd gamma = mc::instantaneous_sinr(h_hat, h_tilde, p, Receiver::mrc);
  for (int kk = 0; kk < k; ++kk) {
    const auto a = h_hat.col(kk);
    double den = a.squaredNorm();
    for (int i = 0; i < k; ++i) {
      if (i != kk) den += p[i] * std::norm((a.adjoint() * h_hat.col(i))(0, 0));
      den += p[i] * std::norm((a.adjoint() * h_tilde.col(i))(0, 0));
    }
    const double num = p[kk] * std::norm((a.adjoint() * h_hat.col(kk))(0, 0));
    CHECK(gamma[kk] == doctest::Approx(num / den).epsilon(1e-12));
  }
}

TEST_CASE("degenerate inputs are rejected") {
  Rng rng(3);
  const MatrixXcd h_hat = random_matrix(rng, 8, 2, 1.0);
  const MatrixXcd h_tilde = MatrixXcd::Zero(8, 2);
  const VectorXd p = VectorXd::Constant(2, 1.0);

  // duplicated columns make the Gram matrix exactly rank deficient
  MatrixXcd dup = h_hat;
  dup.col(1) = dup.col(0);
  CHECK_THROWS_AS(mc::instantaneous_sinr(dup, h_tilde, p, Receiver::zf), std::runtime_error);

  CHECK_THROWS_AS(mc::instantaneous_sinr(h_hat, MatrixXcd::Zero(8, 3), p, Receiver::zf),
                  std::invalid_argument);
  CHECK_THROWS_AS(mc::instantaneous_sinr(h_hat, h_tilde, VectorXd::Constant(3, 1.0), Receiver::mrc),
                  std::invalid_argument);
  // zero-forcing needs more antennas than devices
  CHECK_THROWS_AS(mc::instantaneous_sinr(random_matrix(rng, 2, 2, 1.0), MatrixXcd::Zero(2, 2),
                                          p, Receiver::zf),
                  std::invalid_argument);
}

TEST_CASE("mean inverse instantaneous sinr matches the closed form within 3%") {
  const int m = 50, k = 5, trials = 10000;
  const std::vector<double> alpha = {900.0, 400.0, 150.0, 60.0, 25.0};
  const Scenario sc = drop_sc(m, k, 100, alpha, 2.0, 1.0);
  const VectorXd alphas = sc.alphas();
  const VectorXd pp = VectorXd::Constant(k, 0.02);
  const VectorXd pd = VectorXd::Constant(k, 0.02);

  const auto st = chan::mmse_stats_all(alphas, k, pp);
  for (Receiver r : {Receiver::mrc, Receiver::zf}) {
    const VectorXd gamma_hat = r == Receiver::mrc ? fbl::sinr_lb_mrc(pd, st.sigma, st.delta, m)
                                                  : fbl::sinr_lb_zf(pd, st.sigma, st.delta, m);
    VectorXd inv_sum = VectorXd::Zero(k);
    for (int t = 0; t < trials; ++t) {
      Rng rng(derive_seed(2024, {static_cast<std::uint64_t>(t), r == Receiver::mrc ? 0u : 1u}));
      const MatrixXcd h = chan::draw_true_channels(rng, alphas, m);
      MatrixXcd h_hat(m, k), h_tilde(m, k);
      for (int i = 0; i < k; ++i) {
        auto [hh, ht] = chan::simulate_pilot_estimation(rng, h.col(i), alphas[i], k, pp[i]);
        h_hat.col(i) = hh;
        h_tilde.col(i) = ht;
      }
      const VectorXd gamma = mc::instantaneous_sinr(h_hat, h_tilde, pd, r);
      inv_sum += gamma.cwiseInverse();
    }
    for (int i = 0; i < k; ++i) {
      const double emp = inv_sum[i] / trials;
      CHECK(emp == doctest::Approx(1.0 / gamma_hat[i]).epsilon(0.03));
    }
  }
}

TEST_CASE("empirical ergodic rate sits above the closed-form bound") {
  const Scenario sc = drop_sc(50, 5, 100, {900.0, 400.0, 150.0, 60.0, 25.0}, 2.0, 1.0);
  PowerAllocation pa;
  pa.p_pilot = VectorXd::Constant(5, 0.02);
  pa.p_data = VectorXd::Constant(5, 0.02);

  for (Receiver r : {Receiver::mrc, Receiver::zf}) {
    mc::McConfig cfg;
    cfg.n_trials = 1000;
    cfg.base_seed = 7;
    cfg.receiver = r;
    const mc::ErgodicRate er = mc::empirical_ergodic_rate(sc, pa, cfg);
    REQUIRE(er.mean.size() == 5);
    CHECK(er.redrawn == 0);
    CHECK(er.clamped >= 0);
    for (int i = 0; i < 5; ++i) {
      CHECK(er.std_err[i] > 0.0);
      CHECK(er.mean[i] >= er.lower_bound[i] - 2.0 * er.std_err[i]);
    }
    // the reported bound is the closed-form value at these powers
    const auto st = chan::mmse_stats_all(sc.alphas(), 5, pa.p_pilot);
    const VectorXd gh = r == Receiver::mrc ? fbl::sinr_lb_mrc(pa.p_data, st.sigma, st.delta, 50)
                                           : fbl::sinr_lb_zf(pa.p_data, st.sigma, st.delta, 50);
    for (int i = 0; i < 5; ++i) {
      const double lb = fbl::rate_lb(gh[i], fbl::FblParams::make(100, 5, 1e-9));
      CHECK(er.lower_bound[i] == doctest::Approx(lb).epsilon(1e-14));
    }

    // thread count must not change a single bit of the estimate
    mc::McConfig threaded = cfg;
    threaded.threads = 3;
    const mc::ErgodicRate er3 = mc::empirical_ergodic_rate(sc, pa, threaded);
    CHECK(er3.mean == er.mean);
    CHECK(er3.std_err == er.std_err);
    CHECK(er3.clamped == er.clamped);
  }
}

TEST_CASE("sweep scenarios are reproducible and respect the axis overrides") {
  mc::SweepSpec spec;
  spec.axis = mc::SweepAxis::energy;
  spec.values = {0.5, 2.0};
  spec.snapshots = 4;
  spec.k_devices = 6;
  spec.m_antennas = 32;
  spec.dist_min_m = 80.0;
  spec.dist_max_m = 300.0;

  const Scenario a = mc::sweep_scenario(spec, 1, 2);
  const Scenario b = mc::sweep_scenario(spec, 1, 2);
  CHECK(scenario_to_json(a) == scenario_to_json(b));
  CHECK(scenario_to_json(a) != scenario_to_json(mc::sweep_scenario(spec, 1, 3)));

  CHECK(a.k() == 6);
  for (const auto& d : a.devices) {
    CHECK(d.energy == 0.5 * 4.0);  // value index 1
    CHECK(d.distance_m >= 80.0);
    CHECK(d.distance_m <= 300.0);
    CHECK(d.weight > 0.0);
    CHECK(d.weight <= 1.0);
  }

  mc::SweepSpec kk = spec;
  kk.axis = mc::SweepAxis::device_count;
  kk.values = {4.0};
  CHECK(mc::sweep_scenario(kk, 0, 0).k() == 4);
  kk.values = {4.5};
  CHECK_THROWS_AS(mc::sweep_scenario(kk, 0, 0), std::invalid_argument);

  mc::SweepSpec bl = spec;
  bl.axis = mc::SweepAxis::blocklength;
  bl.values = {60.0};
  CHECK(mc::sweep_scenario(bl, 0, 0).sys.blocklength == 60);

  mc::SweepSpec bad = spec;
  bad.values = {};
  CHECK_THROWS_AS(mc::sweep_scenario(bad, 0, 0), std::invalid_argument);
}

TEST_CASE("run_sweep emits ordered rows and a consistent summary") {
  mc::SweepSpec spec;
  spec.axis = mc::SweepAxis::energy;
  spec.values = {0.6, 1.2};
  spec.snapshots = 3;
  spec.receiver = Receiver::mrc;
  spec.k_devices = 3;
  spec.m_antennas = 24;
  spec.rate_req = 0.5;
  spec.epsilon = 1e-7;
  spec.dist_min_m = 80.0;
  spec.dist_max_m = 300.0;

  const std::vector<mc::Algorithm> algs = {mc::Algorithm::proposed, mc::Algorithm::upper_bound,
                                           mc::Algorithm::conventional,
                                           mc::Algorithm::fixed_pilot};
  const mc::SweepResult res = mc::run_sweep(spec, algs);
  REQUIRE(res.rows.size() == 2 * 3 * 4);

  // ordering: value-major, then snapshot, then algorithm
  for (std::size_t i = 0; i < res.rows.size(); ++i) {
    const auto& r = res.rows[i];
    CHECK(r.value == spec.values[i / 12]);
    CHECK(r.snapshot == static_cast<int>((i / 4) % 3));
    CHECK(r.algorithm == algs[i % 4]);
    CHECK(r.weighted_sum >= 0.0);
    CHECK(r.infeasible_count >= 0);
    CHECK(r.infeasible_count <= 3);
  }

  const std::string csv = res.csv();
  CHECK(csv.rfind("axis,value,algorithm,snapshot,weighted_sum,infeasible_count\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 25);  // header + 24 rows
  CHECK(csv.find("energy,0.6,proposed,0,") != std::string::npos);

  // upper bound ignores the dispersion penalty, so its score dominates the
  // proposal's on every snapshot
  for (std::size_t i = 0; i < res.rows.size(); i += 4)
    CHECK(res.rows[i + 1].weighted_sum >= res.rows[i].weighted_sum - 1e-9);

  const std::string summary = res.summary_json();
  CHECK(summary.find("\"axis\": \"energy\"") != std::string::npos);
  CHECK(summary.find("\"algorithm\": \"proposed\"") != std::string::npos);

  mc::SweepSpec threaded = spec;
  threaded.threads = 2;
  CHECK(mc::run_sweep(threaded, algs).csv() == csv);
}

}  // TEST_SUITE
