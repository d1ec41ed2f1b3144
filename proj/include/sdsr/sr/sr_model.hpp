#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdsr/core/resample.hpp"
#include "sdsr/nn/layers.hpp"

namespace sdsr {

struct SRModelDesc {
  std::string model_id = "sr";
  int blocks = 4;
  int width = 24;
  int scale = 4;
  uint64_t init_seed = 0;
};

// Residual trunk at LR resolution, sub-pixel upsampler, global bicubic skip.
// The head starts at zero so an untrained model is exactly the bicubic
// baseline.
class SRModel {
 public:
  explicit SRModel(const SRModelDesc& desc);

  Tensor forward(const ImageBatch& lr);  // (n,3,h,w) -> (n,3,h*scale,w*scale)
  Tensor backward(const Tensor& gy);
  std::vector<nn::Param*> params();

  // inference helper: forward + clamp, no cache requirements afterwards
  ImageBatch restore(const ImageBatch& lr);

  const std::string& model_id() const { return desc_.model_id; }
  int scale() const { return desc_.scale; }
  const SRModelDesc& desc() const { return desc_; }

 private:
  const SeparableOp& up_op(int h, int w) const;

  SRModelDesc desc_;
  nn::Sequential body_;
  Tensor last_input_;
  mutable std::map<std::pair<int, int>, SeparableOp> up_cache_;
};

}  // namespace sdsr
