#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fblpower {

// SplitMix64 finalizer. Used to turn (base seed, stream indices) into engine
// seeds so that every trial / sweep cell owns an independent stream and the
// results do not depend on how work is split across threads.
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = mix64(base + 0x9e3779b97f4a7c15ull);
  for (std::uint64_t idx : path) s = mix64(s ^ (idx + 0x9e3779b97f4a7c15ull));
  return s;
}

// mt19937_64 with an explicit Box-Muller transform on top. The standard
// library's normal_distribution is implementation-defined, which would break
// bit-reproducibility of result tables across toolchains; this pins the whole
// draw sequence to the code.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform on (0, 1]; never returns 0 so log() below is safe
  double uniform() { return static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double t = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // circularly symmetric complex Gaussian, total variance `var`
  std::complex<double> cnormal(double var) {
    const double s = std::sqrt(0.5 * var);
    return {s * normal(), s * normal()};
  }

  std::uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fblpower
