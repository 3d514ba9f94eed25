#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rubato {

// Seeded generator with fixed-algorithm uniform and normal draws so that
// outputs are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // uniform on [0, 1)
  double uniform() {
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // index in [0, n) proportional to the given nonnegative weights
  template <class Seq>
  int categorical(const Seq& w) {
    double total = 0.0;
    for (double p : w) total += p;
    double u = uniform() * total;
    double acc = 0.0;
    int last = 0;
    int i = 0;
    for (double p : w) {
      acc += p;
      if (u < acc) return i;
      if (p > 0.0) last = i;
      ++i;
    }
    return last;
  }

  uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace rubato
