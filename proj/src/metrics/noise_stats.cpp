#include "sdsr/metrics/noise_stats.hpp"

#include <algorithm>
#include <cmath>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/resample.hpp"

namespace sdsr {

NoiseStdEstimate estimate_noise_std(const ImageBatch& img, int batch_index,
                                    double flat_fraction) {
  NoiseStdEstimate est;
  const int h = img.h(), w = img.w();
  if (h < 5 || w < 5) {
    est.degenerate = true;
    return est;
  }

  // single-image view for the blur
  Tensor one(1, img.c(), h, w);
  for (int c = 0; c < img.c(); ++c)
    std::copy(img.plane(batch_index, c), img.plane(batch_index, c) + int64_t(h) * w,
              one.plane(0, c));
  const Tensor smooth = gaussian_blur(one, 1.0);

  double acc = 0.0;
  int64_t count = 0;
  bool any_flat = true;
  for (int c = 0; c < img.c(); ++c) {
    const double* p = one.plane(0, c);
    const double* s = smooth.plane(0, c);

    std::vector<double> grad;
    grad.reserve(size_t(h - 2) * (w - 2));
    for (int y = 1; y + 1 < h; ++y)
      for (int x = 1; x + 1 < w; ++x) {
        const double gx = 0.5 * (s[y * w + x + 1] - s[y * w + x - 1]);
        const double gy = 0.5 * (s[(y + 1) * w + x] - s[(y - 1) * w + x]);
        grad.push_back(std::sqrt(gx * gx + gy * gy));
      }
    std::vector<double> sorted = grad;
    std::sort(sorted.begin(), sorted.end());
    const auto qi = size_t(double(sorted.size() - 1) * flat_fraction);
    const double thresh = sorted[qi];
    // even the flattest quantile is sloped beyond what heavy noise alone
    // could explain: no usable flat region
    if (thresh > 0.06) any_flat = false;

    size_t gi = 0;
    for (int y = 1; y + 1 < h; ++y)
      for (int x = 1; x + 1 < w; ++x, ++gi) {
        if (grad[gi] > thresh) continue;
        const double lap = 4.0 * p[y * w + x] -
                           2.0 * (p[y * w + x - 1] + p[y * w + x + 1] + p[(y - 1) * w + x] +
                                  p[(y + 1) * w + x]) +
                           p[(y - 1) * w + x - 1] + p[(y - 1) * w + x + 1] +
                           p[(y + 1) * w + x - 1] + p[(y + 1) * w + x + 1];
        acc += std::abs(lap);
        ++count;
      }
  }
  if (!any_flat || count < 16) {
    est.degenerate = true;
    return est;
  }
  est.sigma = std::sqrt(M_PI / 2.0) * (acc / double(count)) / 6.0;
  return est;
}

double paired_noise_std(const ImageBatch& img, const ImageBatch& reference, int batch_index) {
  if (!(img.shape() == reference.shape()))
    throw SizingError("paired_noise_std: shape mismatch");
  const int64_t plane = int64_t(img.c()) * img.h() * img.w();
  const double* a = img.data() + int64_t(batch_index) * plane;
  const double* b = reference.data() + int64_t(batch_index) * plane;
  double mean = 0.0;
  for (int64_t i = 0; i < plane; ++i) mean += a[i] - b[i];
  mean /= double(plane);
  double var = 0.0;
  for (int64_t i = 0; i < plane; ++i) {
    const double d = a[i] - b[i] - mean;
    var += d * d;
  }
  return std::sqrt(var / double(plane - 1));
}

double wasserstein1(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw ConfigError("wasserstein1: empty sample set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const size_t n = a.size(), m = b.size();
  double dist = 0.0;
  size_t i = 0, j = 0;
  double q = 0.0;
  // walk the merged quantile breakpoints of the two step functions
  while (i < n && j < m) {
    const double qa = double(i + 1) / double(n);
    const double qb = double(j + 1) / double(m);
    const double qn = std::min(qa, qb);
    dist += (qn - q) * std::abs(a[i] - b[j]);
    q = qn;
    if (qa <= qn) ++i;
    if (qb <= qn) ++j;
  }
  return dist;
}

}  // namespace sdsr
