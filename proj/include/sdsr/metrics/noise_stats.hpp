#pragma once

#include <vector>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

struct NoiseStdEstimate {
  double sigma = 0.0;
  bool degenerate = false;  // no usable flat region
};

// Blind per-image noise estimate: Laplacian-based residual (the 3x3 stencil
// annihilates smooth content) restricted to low-gradient pixels, rescaled by
// sqrt(pi/2)/6 for white Gaussian noise. Channels averaged. flat_fraction
// selects the quantile of the smoothed gradient magnitude kept as "flat".
NoiseStdEstimate estimate_noise_std(const ImageBatch& img, int batch_index = 0,
                                    double flat_fraction = 0.5);

// paired estimator: plain sample std of (img - reference)
double paired_noise_std(const ImageBatch& img, const ImageBatch& reference,
                        int batch_index = 0);

// Exact Wasserstein-1 distance between two empirical distributions
// (piecewise-constant quantile functions; sample counts may differ).
double wasserstein1(std::vector<double> a, std::vector<double> b);

}  // namespace sdsr
