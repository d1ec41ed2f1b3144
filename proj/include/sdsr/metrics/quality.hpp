#pragma once

#include "sdsr/core/tensor.hpp"

namespace sdsr {

struct PsnrResult {
  double db = 0.0;
  bool infinite = false;  // MSE was exactly zero
};

// 10*log10(peak^2 / MSE), MSE jointly over all channels.
PsnrResult psnr(const ImageBatch& a, const ImageBatch& b, double peak = 1.0);

// Mean local SSIM over valid (unpadded) 11x11 windows, Gaussian weighted
// (std 1.5), k1 = 0.01, k2 = 0.03, peak 1. Channels averaged.
double ssim(const ImageBatch& a, const ImageBatch& b);

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;

}  // namespace sdsr
