#include "sdsr/core/resample.hpp"

#include <cmath>

#include "sdsr/core/errors.hpp"

namespace sdsr {

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n - 2;
  i = ((i % period) + period) % period;
  return i < n ? i : period - i;
}

namespace {

// Catmull-Rom kernel, support 2
double cubic_kernel(double t) {
  t = std::abs(t);
  if (t < 1.0) return 1.5 * t * t * t - 2.5 * t * t + 1.0;
  if (t < 2.0) return -0.5 * t * t * t + 2.5 * t * t - 4.0 * t + 2.0;
  return 0.0;
}

}  // namespace

Taps1D bicubic_taps(int in_size, int out_size) {
  if (in_size < 1 || out_size < 1) throw SizingError("bicubic_taps: empty axis");
  Taps1D t;
  t.in_size = in_size;
  t.out_size = out_size;
  const double scale = double(in_size) / double(out_size);
  const double filter_scale = std::max(scale, 1.0);  // widen kernel when minifying
  const double radius = 2.0 * filter_scale;
  t.support = int(std::floor(2.0 * radius)) + 1;
  t.idx.assign(size_t(out_size) * t.support, 0);
  t.w.assign(size_t(out_size) * t.support, 0.0);

  for (int i = 0; i < out_size; ++i) {
    const double center = (i + 0.5) * scale - 0.5;
    const int first = int(std::ceil(center - radius));
    double sum = 0.0;
    for (int k = 0; k < t.support; ++k) {
      const int j = first + k;
      const double wk = cubic_kernel((double(j) - center) / filter_scale);
      t.idx[size_t(i) * t.support + k] = reflect_index(j, in_size);
      t.w[size_t(i) * t.support + k] = wk;
      sum += wk;
    }
    for (int k = 0; k < t.support; ++k) t.w[size_t(i) * t.support + k] /= sum;
  }
  return t;
}

Taps1D gaussian_taps(int size, double sigma) {
  if (size < 1) throw SizingError("gaussian_taps: empty axis");
  if (sigma <= 0.0) throw SizingError("gaussian_taps: sigma must be > 0");
  Taps1D t;
  t.in_size = size;
  t.out_size = size;
  const int radius = std::max(1, int(std::ceil(3.0 * sigma)));
  t.support = 2 * radius + 1;
  t.idx.assign(size_t(size) * t.support, 0);
  t.w.assign(size_t(size) * t.support, 0.0);
  for (int i = 0; i < size; ++i) {
    double sum = 0.0;
    for (int k = 0; k < t.support; ++k) {
      const int j = i + k - radius;
      const double d = double(k - radius);
      const double wk = std::exp(-0.5 * d * d / (sigma * sigma));
      t.idx[size_t(i) * t.support + k] = reflect_index(j, size);
      t.w[size_t(i) * t.support + k] = wk;
      sum += wk;
    }
    for (int k = 0; k < t.support; ++k) t.w[size_t(i) * t.support + k] /= sum;
  }
  return t;
}

SeparableOp::SeparableOp(Taps1D row_taps, Taps1D col_taps)
    : rows_(std::move(row_taps)), cols_(std::move(col_taps)) {}

Tensor SeparableOp::apply(const Tensor& x) const {
  if (x.h() != rows_.in_size || x.w() != cols_.in_size)
    throw SizingError("SeparableOp::apply: input is " + x.shape().str() + ", plan expects " +
                      std::to_string(rows_.in_size) + "x" + std::to_string(cols_.in_size));
  const int ho = rows_.out_size, wo = cols_.out_size;
  const int hi = rows_.in_size, wi = cols_.in_size;
  Tensor out(x.n(), x.c(), ho, wo);
  std::vector<double> tmp(size_t(ho) * wi);

  for (int n = 0; n < x.n(); ++n) {
    for (int c = 0; c < x.c(); ++c) {
      const double* src = x.plane(n, c);
      // height pass
      for (int oy = 0; oy < ho; ++oy) {
        const int* idx = rows_.idx.data() + size_t(oy) * rows_.support;
        const double* w = rows_.w.data() + size_t(oy) * rows_.support;
        for (int ix = 0; ix < wi; ++ix) {
          double acc = 0.0;
          for (int k = 0; k < rows_.support; ++k) acc += w[k] * src[idx[k] * wi + ix];
          tmp[size_t(oy) * wi + ix] = acc;
        }
      }
      // width pass
      double* dst = out.plane(n, c);
      for (int oy = 0; oy < ho; ++oy) {
        const double* row = tmp.data() + size_t(oy) * wi;
        for (int ox = 0; ox < wo; ++ox) {
          const int* idx = cols_.idx.data() + size_t(ox) * cols_.support;
          const double* w = cols_.w.data() + size_t(ox) * cols_.support;
          double acc = 0.0;
          for (int k = 0; k < cols_.support; ++k) acc += w[k] * row[idx[k]];
          dst[size_t(oy) * wo + ox] = acc;
        }
      }
    }
  }
  return out;
}

Tensor SeparableOp::adjoint(const Tensor& gy) const {
  if (gy.h() != rows_.out_size || gy.w() != cols_.out_size)
    throw SizingError("SeparableOp::adjoint: grad is " + gy.shape().str() + ", plan expects " +
                      std::to_string(rows_.out_size) + "x" + std::to_string(cols_.out_size));
  const int ho = rows_.out_size, wo = cols_.out_size;
  const int hi = rows_.in_size, wi = cols_.in_size;
  Tensor gx(gy.n(), gy.c(), hi, wi);
  std::vector<double> tmp(size_t(ho) * wi);

  for (int n = 0; n < gy.n(); ++n) {
    for (int c = 0; c < gy.c(); ++c) {
      // transpose of width pass: scatter columns
      std::fill(tmp.begin(), tmp.end(), 0.0);
      const double* g = gy.plane(n, c);
      for (int oy = 0; oy < ho; ++oy) {
        double* row = tmp.data() + size_t(oy) * wi;
        for (int ox = 0; ox < wo; ++ox) {
          const int* idx = cols_.idx.data() + size_t(ox) * cols_.support;
          const double* w = cols_.w.data() + size_t(ox) * cols_.support;
          const double gv = g[size_t(oy) * wo + ox];
          for (int k = 0; k < cols_.support; ++k) row[idx[k]] += w[k] * gv;
        }
      }
      // transpose of height pass: scatter rows
      double* dst = gx.plane(n, c);
      for (int oy = 0; oy < ho; ++oy) {
        const int* idx = rows_.idx.data() + size_t(oy) * rows_.support;
        const double* w = rows_.w.data() + size_t(oy) * rows_.support;
        const double* row = tmp.data() + size_t(oy) * wi;
        for (int k = 0; k < rows_.support; ++k) {
          double* drow = dst + size_t(idx[k]) * wi;
          for (int ix = 0; ix < wi; ++ix) drow[ix] += w[k] * row[ix];
        }
      }
    }
  }
  return gx;
}

SeparableOp make_bicubic_resize(int in_h, int in_w, int out_h, int out_w) {
  return SeparableOp(bicubic_taps(in_h, out_h), bicubic_taps(in_w, out_w));
}

SeparableOp make_downsampler(int in_h, int in_w, int scale) {
  if (scale < 1 || in_h % scale != 0 || in_w % scale != 0)
    throw SizingError("make_downsampler: dims " + std::to_string(in_h) + "x" +
                      std::to_string(in_w) + " not divisible by scale " + std::to_string(scale));
  return make_bicubic_resize(in_h, in_w, in_h / scale, in_w / scale);
}

SeparableOp make_upsampler(int in_h, int in_w, int scale) {
  if (scale < 1) throw SizingError("make_upsampler: bad scale");
  return make_bicubic_resize(in_h, in_w, in_h * scale, in_w * scale);
}

SeparableOp make_blur(int h, int w, double sigma) {
  return SeparableOp(gaussian_taps(h, sigma), gaussian_taps(w, sigma));
}

Tensor bicubic_downsample(const Tensor& x, int scale) {
  return make_downsampler(x.h(), x.w(), scale).apply(x);
}

Tensor bicubic_upsample(const Tensor& x, int scale) {
  return make_upsampler(x.h(), x.w(), scale).apply(x);
}

Tensor gaussian_blur(const Tensor& x, double sigma) {
  return make_blur(x.h(), x.w(), sigma).apply(x);
}

}  // namespace sdsr
