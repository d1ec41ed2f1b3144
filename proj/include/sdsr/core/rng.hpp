#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

// Deterministic RNG. Gaussian variates come from an explicit Box-Muller
// transform (std::normal_distribution is implementation-defined and would
// break bit-reproducibility across standard libraries).
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1)
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n), rejection sampled to avoid modulo bias
  int64_t uniform_int(int64_t n);

  // standard normal
  double gaussian();

 private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

uint64_t splitmix64(uint64_t x);

// Derives a decorrelated stream seed from a base seed, a purpose tag and an
// index. Same inputs always give the same stream.
uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t k = 0);

void fill_gaussian(Tensor& t, Rng& rng, double scale = 1.0);

}  // namespace sdsr
