#include "sdsr/data/textures.hpp"

#include <cmath>
#include <vector>

#include "sdsr/core/rng.hpp"

namespace sdsr {

ImageBatch make_texture(int size, int channels, uint64_t seed, uint64_t index) {
  Rng rng(derive_seed(seed, "texture", index));
  Tensor img(1, channels, size, size);

  // shared luminance field
  std::vector<double> field(size_t(size) * size, 0.0);
  const int n_waves = 3 + int(rng.uniform_int(3));
  for (int k = 0; k < n_waves; ++k) {
    const double fx = rng.uniform(-3.0, 3.0) / double(size);
    const double fy = rng.uniform(-3.0, 3.0) / double(size);
    const double phase = rng.uniform(0.0, 2.0 * M_PI);
    const double amp = rng.uniform(0.3, 1.0);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x)
        field[size_t(y) * size + x] +=
            amp * std::cos(2.0 * M_PI * (fx * x + fy * y) + phase);
  }
  const int n_blobs = 2 + int(rng.uniform_int(3));
  for (int k = 0; k < n_blobs; ++k) {
    const double cx = rng.uniform(0.1, 0.9) * size;
    const double cy = rng.uniform(0.1, 0.9) * size;
    const double r = rng.uniform(0.08, 0.25) * size;
    const double amp = rng.uniform(-1.5, 1.5);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
        field[size_t(y) * size + x] += amp * std::exp(-d2 / (2.0 * r * r));
      }
  }

  // per-channel gain/offset around the shared field, then soft saturation
  for (int c = 0; c < channels; ++c) {
    const double gain = rng.uniform(0.7, 1.3);
    const double offset = rng.uniform(-0.3, 0.3);
    double* p = img.plane(0, c);
    for (int i = 0; i < size * size; ++i)
      p[i] = 0.5 + 0.4 * std::tanh(gain * field[size_t(i)] + offset);
  }
  return img;
}

}  // namespace sdsr
