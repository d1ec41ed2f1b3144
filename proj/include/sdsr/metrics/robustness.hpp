#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

// Fig. 7 style sweep: additive Gaussian noise on the LR inputs at test time
// only, one (psnr, ssim) point per noise level on the 8-bit scale.
struct RobustnessCurve {
  std::vector<double> sigma_grid;  // 8-bit scale, strictly increasing
  std::vector<double> psnr_at_sigma;
  std::vector<double> ssim_at_sigma;
};

using RestoreFn = std::function<ImageBatch(const ImageBatch&)>;

struct ValPair {
  ImageBatch lr, hr;
};

// The perturbation is applied unclamped so the injected statistics are exact.
RobustnessCurve robustness_sweep(const RestoreFn& model, const std::vector<ValPair>& val_pairs,
                                 const std::vector<double>& sigma_grid, uint64_t seed);

std::string robustness_to_json(const RobustnessCurve& c);
RobustnessCurve robustness_from_json(const std::string& json_text);
void write_robustness_csv(const std::string& path, const RobustnessCurve& c);

}  // namespace sdsr
