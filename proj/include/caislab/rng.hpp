#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace caislab {

// Every consumer of randomness in a run pulls from its own named stream so
// that adding draws to one subsystem never shifts the values seen by another.
// Stream seeds are derived from the run seed with splitmix64, which is enough
// to decorrelate consecutive ids.
enum class Stream : std::uint64_t {
  kTorqueSign = 1,
  kNoiseForce = 2,
  kObservationNoise = 3,
  kObserverMatrix = 4,
  kLimbGeometry = 5,
  kPolicy = 6,
  kNetworkInit = 7,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t run_seed, Stream id) {
  std::uint64_t s = run_seed;
  std::uint64_t a = splitmix64(s);
  s = a ^ (static_cast<std::uint64_t>(id) * 0xbf58476d1ce4e5b9ull);
  std::uint64_t b = splitmix64(s);
  return std::mt19937_64(b);
}

// Uniformly distributed direction in R^3 (normalized Gaussian triple).
inline std::array<double, 3> random_unit3(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (;;) {
    std::array<double, 3> v{gauss(rng), gauss(rng), gauss(rng)};
    double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n > 1e-12) {
      v[0] /= n;
      v[1] /= n;
      v[2] /= n;
      return v;
    }
  }
}

}  // namespace caislab
