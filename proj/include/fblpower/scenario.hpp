#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace fblpower {

// Uplift system description: one cell, M base-station antennas, K single
// antenna devices sharing a frame of `blocklength` symbols of which the
// first K carry orthogonal pilots.
struct SystemParams {
  int m_antennas = 100;
  int k_devices = 10;
  double bandwidth_hz = 2.0e5;
  int blocklength = 100;  // L, symbols per frame
  double noise_psd_dbm_hz = -174.0;

  // beta = K/L, the fraction of the frame spent on pilots
  double pilot_overhead() const {
    return static_cast<double>(k_devices) / static_cast<double>(blocklength);
  }
};

struct DeviceParams {
  double alpha = 1.0;      // noise-normalized large-scale channel gain
  double weight = 1.0;     // scheduler weight in [0, 1]
  double epsilon = 1e-9;   // decoding error probability target
  double energy = 2.0;     // noise-normalized per-frame energy budget
  double rate_req = 1.0;   // minimum rate, bit/s/Hz
  double distance_m = 0.0; // informational; 0 when alpha was given directly
};

struct Scenario {
  SystemParams sys;
  std::vector<DeviceParams> devices;
  std::uint64_t seed = 1;

  int k() const { return static_cast<int>(devices.size()); }
  Eigen::VectorXd alphas() const;
  Eigen::VectorXd weights() const;
  Eigen::VectorXd energies() const;
};

// 35.3 + 37.6 log10(d) path loss in dB at distance d meters
double path_loss_db(double distance_m);

// Noise-normalized large-scale gain: linear path gain divided by the thermal
// noise power over `bandwidth_hz` at the given PSD.
double derive_alpha(double distance_m, double noise_psd_dbm_hz, double bandwidth_hz);

// Throws std::invalid_argument naming the offending field (and device index)
// if any invariant is violated.
void validate(const Scenario& sc);

// Strict JSON loader; unknown keys are rejected rather than ignored.
Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const Scenario& sc);

struct RandomScenarioOpts {
  int m_antennas = 100;
  double bandwidth_hz = 2.0e5;
  int blocklength = 100;
  double noise_psd_dbm_hz = -174.0;
  double epsilon = 1e-9;
  double energy = 2.0;
  double rate_req = 1.0;
};

// Devices dropped uniformly over the disk of the given radius (distances
// below 1 m are snapped to 1 m); weights drawn uniformly from [0, 1].
Scenario random_scenario(std::uint64_t seed, int k_devices, double cell_radius_m,
                         const RandomScenarioOpts& opts = {});

}  // namespace fblpower
