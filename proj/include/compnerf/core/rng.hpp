#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

#include "compnerf/core/types.hpp"

namespace compnerf {

// mt19937_64 with stateless (re-derived per call) distributions, so the
// engine state alone captures the whole stream. Checkpoints serialize it as
// text; fork() derives independent substreams for parallel trajectory
// generation.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : eng_(seed) {}

  double uniform() {
    return double(eng_() >> 11) * 0x1.0p-53;
  }
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  double normal() {
    // Box-Muller, fresh pair per call (no cached state).
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  int64_t randint(int64_t n) {
    check(n > 0, "randint: n must be positive");
    return int64_t((static_cast<unsigned __int128>(eng_()) * static_cast<uint64_t>(n)) >> 64);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int64_t i = static_cast<int64_t>(v.size()) - 1; i > 0; --i)
      std::swap(v[i], v[randint(i + 1)]);
  }

  Rng fork(uint64_t stream) const {
    // splitmix64 over (engine-independent) seed material
    uint64_t x = seed_material_ ^ (0x9E3779B97F4A7C15ull * (stream + 1));
    auto mix = [](uint64_t z) {
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      return z ^ (z >> 31);
    };
    Rng r(mix(x));
    r.seed_material_ = mix(x ^ 0xD6E8FEB86659FD93ull);
    return r;
  }

  std::string save_state() const {
    std::ostringstream os;
    os << eng_ << " " << seed_material_;
    return os.str();
  }
  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_ >> seed_material_;
    check(!is.fail(), "Rng: malformed state string");
  }

  static Rng seeded(uint64_t seed) {
    Rng r(seed);
    r.seed_material_ = seed;
    return r;
  }

 private:
  std::mt19937_64 eng_;
  uint64_t seed_material_ = 0;
};

}  // namespace compnerf
