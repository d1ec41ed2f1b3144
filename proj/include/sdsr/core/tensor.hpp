#pragma once

#include <cassert>
#include <cstdint>
#include <string>
#include <vector>

namespace sdsr {

struct Shape {
  int n = 0, c = 0, h = 0, w = 0;

  int64_t numel() const { return int64_t(n) * c * h * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

// Dense rank-4 tensor (batch, channel, height, width), double precision,
// contiguous with width fastest. All image-like data in this project is
// carried in this layout; images additionally keep values in [0,1].
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape s, double fill = 0.0) : shape_(s), v_(size_t(s.numel()), fill) {}
  Tensor(int n, int c, int h, int w, double fill = 0.0) : Tensor(Shape{n, c, h, w}, fill) {}

  const Shape& shape() const { return shape_; }
  int n() const { return shape_.n; }
  int c() const { return shape_.c; }
  int h() const { return shape_.h; }
  int w() const { return shape_.w; }
  int64_t numel() const { return shape_.numel(); }
  bool empty() const { return v_.empty(); }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  double& operator[](int64_t i) { return v_[size_t(i)]; }
  double operator[](int64_t i) const { return v_[size_t(i)]; }

  int64_t index(int in, int ic, int iy, int ix) const {
    assert(in >= 0 && in < shape_.n && ic >= 0 && ic < shape_.c);
    assert(iy >= 0 && iy < shape_.h && ix >= 0 && ix < shape_.w);
    return ((int64_t(in) * shape_.c + ic) * shape_.h + iy) * shape_.w + ix;
  }
  double& at(int in, int ic, int iy, int ix) { return v_[size_t(index(in, ic, iy, ix))]; }
  double at(int in, int ic, int iy, int ix) const { return v_[size_t(index(in, ic, iy, ix))]; }

  // pointer to the start of one (n, c) plane
  double* plane(int in, int ic) { return v_.data() + index(in, ic, 0, 0); }
  const double* plane(int in, int ic) const { return v_.data() + index(in, ic, 0, 0); }

  void fill(double v) { std::fill(v_.begin(), v_.end(), v); }
  void zero() { fill(0.0); }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape()); }

  double min() const;
  double max() const;
  double mean() const;
  double abs_mean() const;
  bool all_finite() const;

 private:
  Shape shape_;
  std::vector<double> v_;
};

// Images are plain tensors plus the [0,1] range invariant.
using ImageBatch = Tensor;

// elementwise / reduction helpers used across the project
double l1_mean(const Tensor& a, const Tensor& b);  // mean |a - b|
double mse(const Tensor& a, const Tensor& b);
double max_abs_diff(const Tensor& a, const Tensor& b);
bool bit_equal(const Tensor& a, const Tensor& b);
Tensor clamp01(const Tensor& t);

void require_same_shape(const Tensor& a, const Tensor& b, const char* where);
void require_unit_range(const Tensor& t, const char* where);

}  // namespace sdsr
