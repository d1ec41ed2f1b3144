#include "sdsr/data/oracle.hpp"

#include <algorithm>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/resample.hpp"
#include "sdsr/core/rng.hpp"

namespace sdsr {

ImageBatch oracle_degrade(const ImageBatch& hr, const OracleDegradation& oracle,
                          uint64_t rng_seed) {
  if (hr.h() % oracle.scale != 0 || hr.w() % oracle.scale != 0)
    throw SizingError("oracle_degrade: dims " + hr.shape().str() + " not divisible by scale " +
                      std::to_string(oracle.scale));
  Tensor lr = bicubic_downsample(hr, oracle.scale);
  Rng rng(derive_seed(rng_seed, "oracle", oracle.seed));
  const int64_t plane = int64_t(lr.c()) * lr.h() * lr.w();
  for (int n = 0; n < lr.n(); ++n) {
    const double sigma = rng.uniform(oracle.sigma_lo, oracle.sigma_hi) / 255.0;
    double* p = lr.data() + int64_t(n) * plane;
    for (int64_t i = 0; i < plane; ++i)
      p[i] = std::clamp(p[i] + sigma * rng.gaussian(), 0.0, 1.0);
  }
  return lr;
}

ImageBatch oracle_clean(const ImageBatch& hr, const OracleDegradation& oracle) {
  if (hr.h() % oracle.scale != 0 || hr.w() % oracle.scale != 0)
    throw SizingError("oracle_clean: dims " + hr.shape().str() + " not divisible by scale " +
                      std::to_string(oracle.scale));
  return clamp01(bicubic_downsample(hr, oracle.scale));
}

}  // namespace sdsr
