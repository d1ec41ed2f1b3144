#include "sdsr/core/rng.hpp"

#include <cmath>

namespace sdsr {

int64_t Rng::uniform_int(int64_t n) {
  if (n <= 1) return 0;
  const uint64_t un = uint64_t(n);
  const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  uint64_t r;
  do {
    r = eng_();
  } while (r >= limit);
  return int64_t(r % un);
}

double Rng::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  const double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * M_PI * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t k) {
  uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a over the tag
  for (char c : tag) {
    h ^= uint64_t(uint8_t(c));
    h *= 0x100000001b3ULL;
  }
  return splitmix64(splitmix64(base ^ h) ^ k);
}

void fill_gaussian(Tensor& t, Rng& rng, double scale) {
  double* p = t.data();
  for (int64_t i = 0, n = t.numel(); i < n; ++i) p[i] = scale * rng.gaussian();
}

}  // namespace sdsr
