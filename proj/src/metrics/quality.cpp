#include "sdsr/metrics/quality.hpp"

#include <cmath>
#include <vector>

#include "sdsr/core/errors.hpp"

namespace sdsr {

PsnrResult psnr(const ImageBatch& a, const ImageBatch& b, double peak) {
  require_same_shape(a, b, "psnr");
  const double m = mse(a, b);
  PsnrResult r;
  if (m == 0.0) {
    r.infinite = true;
    r.db = std::numeric_limits<double>::infinity();
    return r;
  }
  r.db = 10.0 * std::log10(peak * peak / m);
  return r;
}

double ssim(const ImageBatch& a, const ImageBatch& b) {
  require_same_shape(a, b, "ssim");
  const int win = kSsimWindow, rad = win / 2;
  if (a.h() < win || a.w() < win)
    throw SizingError("ssim: image " + a.shape().str() + " smaller than the " +
                      std::to_string(win) + "x" + std::to_string(win) + " window");

  // separable Gaussian window
  std::vector<double> g(win);
  double gsum = 0.0;
  for (int i = 0; i < win; ++i) {
    const double d = double(i - rad);
    g[size_t(i)] = std::exp(-0.5 * d * d / (kSsimSigma * kSsimSigma));
    gsum += g[size_t(i)];
  }
  for (double& v : g) v /= gsum;

  const double c1 = kSsimK1 * kSsimK1;
  const double c2 = kSsimK2 * kSsimK2;
  const int ho = a.h() - win + 1, wo = a.w() - win + 1;
  const int wi = a.w();

  // horizontal then vertical pass over the five raw moment maps
  auto filter_valid = [&](const std::vector<double>& src, int h, int w,
                          std::vector<double>& dst) {
    std::vector<double> tmp(size_t(h) * (w - win + 1));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x + win <= w; ++x) {
        double acc = 0.0;
        for (int k = 0; k < win; ++k) acc += g[size_t(k)] * src[size_t(y) * w + x + k];
        tmp[size_t(y) * (w - win + 1) + x] = acc;
      }
    dst.assign(size_t(h - win + 1) * (w - win + 1), 0.0);
    for (int y = 0; y + win <= h; ++y)
      for (int x = 0; x < w - win + 1; ++x) {
        double acc = 0.0;
        for (int k = 0; k < win; ++k) acc += g[size_t(k)] * tmp[size_t(y + k) * (w - win + 1) + x];
        dst[size_t(y) * (w - win + 1) + x] = acc;
      }
  };

  double total = 0.0;
  int64_t count = 0;
  std::vector<double> xa(size_t(a.h()) * wi), xb(xa.size()), xaa(xa.size()), xbb(xa.size()),
      xab(xa.size());
  std::vector<double> mu_a, mu_b, m_aa, m_bb, m_ab;

  for (int n = 0; n < a.n(); ++n) {
    for (int c = 0; c < a.c(); ++c) {
      const double* pa = a.plane(n, c);
      const double* pb = b.plane(n, c);
      for (size_t i = 0; i < xa.size(); ++i) {
        xa[i] = pa[i];
        xb[i] = pb[i];
        xaa[i] = pa[i] * pa[i];
        xbb[i] = pb[i] * pb[i];
        xab[i] = pa[i] * pb[i];
      }
      filter_valid(xa, a.h(), wi, mu_a);
      filter_valid(xb, a.h(), wi, mu_b);
      filter_valid(xaa, a.h(), wi, m_aa);
      filter_valid(xbb, a.h(), wi, m_bb);
      filter_valid(xab, a.h(), wi, m_ab);
      for (int i = 0; i < ho * wo; ++i) {
        const double ma = mu_a[size_t(i)], mb = mu_b[size_t(i)];
        const double va = m_aa[size_t(i)] - ma * ma;
        const double vb = m_bb[size_t(i)] - mb * mb;
        const double cov = m_ab[size_t(i)] - ma * mb;
        const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        total += num / den;
        ++count;
      }
    }
  }
  return total / double(count);
}

}  // namespace sdsr
