#include "sdsr/core/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "sdsr/core/errors.hpp"

namespace sdsr {

std::string Shape::str() const {
  std::ostringstream os;
  os << "(" << n << "," << c << "," << h << "," << w << ")";
  return os.str();
}

double Tensor::min() const {
  double m = v_.empty() ? 0.0 : v_[0];
  for (double x : v_) m = std::min(m, x);
  return m;
}

double Tensor::max() const {
  double m = v_.empty() ? 0.0 : v_[0];
  for (double x : v_) m = std::max(m, x);
  return m;
}

double Tensor::mean() const {
  if (v_.empty()) return 0.0;
  double s = 0.0;
  for (double x : v_) s += x;
  return s / double(v_.size());
}

double Tensor::abs_mean() const {
  if (v_.empty()) return 0.0;
  double s = 0.0;
  for (double x : v_) s += std::abs(x);
  return s / double(v_.size());
}

bool Tensor::all_finite() const {
  for (double x : v_)
    if (!std::isfinite(x)) return false;
  return true;
}

double l1_mean(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "l1_mean");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (int64_t i = 0, n = a.numel(); i < n; ++i) s += std::abs(pa[i] - pb[i]);
  return s / double(a.numel());
}

double mse(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "mse");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (int64_t i = 0, n = a.numel(); i < n; ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return s / double(a.numel());
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (int64_t i = 0, n = a.numel(); i < n; ++i) m = std::max(m, std::abs(pa[i] - pb[i]));
  return m;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape())) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * size_t(a.numel())) == 0;
}

Tensor clamp01(const Tensor& t) {
  Tensor out = t;
  double* p = out.data();
  for (int64_t i = 0, n = out.numel(); i < n; ++i) p[i] = std::clamp(p[i], 0.0, 1.0);
  return out;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* where) {
  if (!(a.shape() == b.shape()))
    throw SizingError(std::string(where) + ": shape mismatch " + a.shape().str() + " vs " +
                      b.shape().str());
}

void require_unit_range(const Tensor& t, const char* where) {
  if (!t.all_finite())
    throw NumericError(std::string(where) + ": non-finite values in image tensor");
  if (t.min() < 0.0 || t.max() > 1.0)
    throw NumericError(std::string(where) + ": image values outside [0,1]");
}

}  // namespace sdsr
