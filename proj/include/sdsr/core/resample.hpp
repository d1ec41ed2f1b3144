#pragma once

#include <vector>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

// Precomputed 1-D filter taps: out[i] = sum_k w[i*support+k] * in[idx[i*support+k]].
// Border handling is mirror reflection and the indices stored here are already
// resolved, so apply/adjoint are plain gathers/scatters. Weights are
// normalized per output sample; constants survive resampling bit-exactly.
struct Taps1D {
  int in_size = 0;
  int out_size = 0;
  int support = 0;
  std::vector<int> idx;
  std::vector<double> w;
};

// Catmull-Rom cubic (a = -0.5), widened by the scale factor when minifying.
Taps1D bicubic_taps(int in_size, int out_size);
Taps1D gaussian_taps(int size, double sigma);

// Fixed separable linear operator (height pass then width pass) with an
// exact adjoint. Used for the oracle downsampler, the cycle-loss upsampler,
// low-pass comparisons and the bicubic skip connections.
class SeparableOp {
 public:
  SeparableOp() = default;
  SeparableOp(Taps1D row_taps, Taps1D col_taps);

  Tensor apply(const Tensor& x) const;
  Tensor adjoint(const Tensor& gy) const;

  int in_h() const { return rows_.in_size; }
  int in_w() const { return cols_.in_size; }
  int out_h() const { return rows_.out_size; }
  int out_w() const { return cols_.out_size; }

 private:
  Taps1D rows_, cols_;
};

SeparableOp make_bicubic_resize(int in_h, int in_w, int out_h, int out_w);
SeparableOp make_downsampler(int in_h, int in_w, int scale);
SeparableOp make_upsampler(int in_h, int in_w, int scale);
SeparableOp make_blur(int h, int w, double sigma);

// convenience one-shot wrappers (plans built per call)
Tensor bicubic_downsample(const Tensor& x, int scale);
Tensor bicubic_upsample(const Tensor& x, int scale);
Tensor gaussian_blur(const Tensor& x, double sigma);

int reflect_index(int i, int n);

}  // namespace sdsr
