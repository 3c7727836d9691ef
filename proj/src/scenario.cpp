#include "fblpower/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fblpower/rng.hpp"
#include "json.hpp"

namespace fblpower {

using nlohmann::json;

Eigen::VectorXd Scenario::alphas() const {
  Eigen::VectorXd v(k());
  for (int i = 0; i < k(); ++i) v[i] = devices[i].alpha;
  return v;
}

Eigen::VectorXd Scenario::weights() const {
  Eigen::VectorXd v(k());
  for (int i = 0; i < k(); ++i) v[i] = devices[i].weight;
  return v;
}

Eigen::VectorXd Scenario::energies() const {
  Eigen::VectorXd v(k());
  for (int i = 0; i < k(); ++i) v[i] = devices[i].energy;
  return v;
}

double path_loss_db(double distance_m) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("path_loss_db: distance must be > 0");
  return 35.3 + 37.6 * std::log10(distance_m);
}

double derive_alpha(double distance_m, double noise_psd_dbm_hz, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw std::invalid_argument("derive_alpha: bandwidth must be > 0");
  const double gain = std::pow(10.0, -path_loss_db(distance_m) / 10.0);
  const double noise_dbm = noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
  const double noise_w = std::pow(10.0, (noise_dbm - 30.0) / 10.0);
  return gain / noise_w;
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument("scenario: " + msg); }

std::string dev(int i) { return "devices[" + std::to_string(i) + "]"; }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& item : obj.items())
    if (!allowed.count(item.key())) fail("unknown key '" + item.key() + "' in " + where);
}

double require_num(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail("missing key '" + key + "' in " + where);
  if (!obj[key].is_number()) fail("key '" + key + "' in " + where + " must be a number");
  return obj[key].get<double>();
}

int require_int(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) fail("missing key '" + key + "' in " + where);
  if (!obj[key].is_number_integer()) fail("key '" + key + "' in " + where + " must be an integer");
  return obj[key].get<int>();
}

}  // namespace

void validate(const Scenario& sc) {
  const auto& s = sc.sys;
  if (s.m_antennas < 2) fail("system.M must be >= 2");
  if (s.k_devices < 1) fail("system.K must be >= 1");
  if (s.m_antennas <= s.k_devices) fail("system.M must exceed K (zero-forcing is undefined otherwise)");
  if (s.blocklength <= s.k_devices) fail("system.blocklength must exceed K (no payload symbols left)");
  if (!(s.bandwidth_hz > 0.0)) fail("system.bandwidth_hz must be > 0");
  if (sc.k() != s.k_devices)
    fail("devices array has " + std::to_string(sc.k()) + " entries, system.K = " +
         std::to_string(s.k_devices));
  for (int i = 0; i < sc.k(); ++i) {
    const auto& d = sc.devices[i];
    if (!(d.alpha > 0.0)) fail(dev(i) + ".alpha must be > 0");
    if (!(d.weight >= 0.0 && d.weight <= 1.0)) fail(dev(i) + ".weight must lie in [0, 1]");
    if (!(d.epsilon > 0.0 && d.epsilon < 0.5)) fail(dev(i) + ".epsilon must lie in (0, 0.5)");
    if (!(d.energy > 0.0)) fail(dev(i) + ".energy must be > 0");
    if (!(d.rate_req >= 0.0)) fail(dev(i) + ".rate_req must be >= 0");
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    fail("JSON parse error in '" + path + "': " + e.what());
  }

  check_keys(j, {"system", "devices", "seed"}, "top level");
  if (!j.contains("system")) fail("missing 'system' object");
  if (!j.contains("devices") || !j["devices"].is_array()) fail("missing 'devices' array");

  const json& sys = j["system"];
  check_keys(sys, {"M", "K", "bandwidth_hz", "blocklength", "noise_psd_dbm_hz"}, "system");
  Scenario sc;
  sc.sys.m_antennas = require_int(sys, "M", "system");
  sc.sys.k_devices = require_int(sys, "K", "system");
  sc.sys.bandwidth_hz = require_num(sys, "bandwidth_hz", "system");
  sc.sys.blocklength = require_int(sys, "blocklength", "system");
  sc.sys.noise_psd_dbm_hz = require_num(sys, "noise_psd_dbm_hz", "system");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) fail("'seed' must be an integer");
    sc.seed = j["seed"].get<std::uint64_t>();
  }

  int i = 0;
  for (const auto& jd : j["devices"]) {
    check_keys(jd, {"distance_m", "alpha", "weight", "epsilon", "energy", "rate_req"}, dev(i));
    DeviceParams d;
    const bool has_dist = jd.contains("distance_m");
    const bool has_alpha = jd.contains("alpha");
    if (has_dist == has_alpha)
      fail(dev(i) + " must give exactly one of 'distance_m' or 'alpha'");
    if (has_dist) {
      d.distance_m = require_num(jd, "distance_m", dev(i));
      if (!(d.distance_m > 0.0)) fail(dev(i) + ".distance_m must be > 0");
      d.alpha = derive_alpha(d.distance_m, sc.sys.noise_psd_dbm_hz, sc.sys.bandwidth_hz);
    } else {
      d.alpha = require_num(jd, "alpha", dev(i));
    }
    d.weight = require_num(jd, "weight", dev(i));
    d.epsilon = require_num(jd, "epsilon", dev(i));
    d.energy = require_num(jd, "energy", dev(i));
    d.rate_req = require_num(jd, "rate_req", dev(i));
    sc.devices.push_back(d);
    ++i;
  }

  validate(sc);
  return sc;
}

std::string scenario_to_json(const Scenario& sc) {
  json j;
  j["system"] = {{"M", sc.sys.m_antennas},
                 {"K", sc.sys.k_devices},
                 {"bandwidth_hz", sc.sys.bandwidth_hz},
                 {"blocklength", sc.sys.blocklength},
                 {"noise_psd_dbm_hz", sc.sys.noise_psd_dbm_hz}};
  j["seed"] = sc.seed;
  j["devices"] = json::array();
  for (const auto& d : sc.devices) {
    json jd = {{"weight", d.weight},
               {"epsilon", d.epsilon},
               {"energy", d.energy},
               {"rate_req", d.rate_req}};
    // alpha is derived when a distance was given; keep the originating field
    if (d.distance_m > 0.0)
      jd["distance_m"] = d.distance_m;
    else
      jd["alpha"] = d.alpha;
    j["devices"].push_back(jd);
  }
  return j.dump(2);
}

Scenario random_scenario(std::uint64_t seed, int k_devices, double cell_radius_m,
                         const RandomScenarioOpts& opts) {
  if (k_devices < 1) fail("random_scenario: K must be >= 1");
  if (!(cell_radius_m >= 1.0)) fail("random_scenario: cell radius must be >= 1 m");
  Scenario sc;
  sc.seed = seed;
  sc.sys.m_antennas = opts.m_antennas;
  sc.sys.k_devices = k_devices;
  sc.sys.bandwidth_hz = opts.bandwidth_hz;
  sc.sys.blocklength = opts.blocklength;
  sc.sys.noise_psd_dbm_hz = opts.noise_psd_dbm_hz;

  Rng rng(derive_seed(seed, {0x5ce9a21ull}));
  for (int i = 0; i < k_devices; ++i) {
    DeviceParams d;
    // uniform over the disk area => radius scales with sqrt(u)
    d.distance_m = std::max(1.0, cell_radius_m * std::sqrt(rng.uniform()));
    d.alpha = derive_alpha(d.distance_m, opts.noise_psd_dbm_hz, opts.bandwidth_hz);
    d.weight = rng.uniform();
    d.epsilon = opts.epsilon;
    d.energy = opts.energy;
    d.rate_req = opts.rate_req;
    sc.devices.push_back(d);
  }
  validate(sc);
  return sc;
}

}  // namespace fblpower
