#include "sdsr/sr/sr_model.hpp"

#include "sdsr/core/errors.hpp"

namespace sdsr {

using nn::Conv2d;
using nn::LeakyReLU;

SRModel::SRModel(const SRModelDesc& desc) : desc_(desc), body_(desc.model_id) {
  if (desc.scale != 1 && desc.scale != 2 && desc.scale != 4)
    throw ConfigError(desc.model_id + ": scale must be 1, 2 or 4");
  Rng rng(derive_seed(desc.init_seed, "sr_init"));
  const int w = desc.width;
  const std::string& id = desc_.model_id;
  body_.add(std::make_unique<Conv2d>(id + ".stem", 3, w, 3, 1, rng));
  body_.add(std::make_unique<LeakyReLU>(0.2, id + ".stem_act"));
  for (int b = 0; b < desc.blocks; ++b)
    body_.add(std::make_unique<nn::ResidualBlock>(id + ".rb" + std::to_string(b), w, rng));
  const int head_out = 3 * desc.scale * desc.scale;
  body_.add(std::make_unique<Conv2d>(id + ".head", w, head_out, 3, 1, rng, 0.0));
  if (desc.scale > 1) body_.add(std::make_unique<nn::PixelShuffle>(desc.scale, id + ".shuffle"));
}

const SeparableOp& SRModel::up_op(int h, int w) const {
  auto key = std::make_pair(h, w);
  auto it = up_cache_.find(key);
  if (it == up_cache_.end()) it = up_cache_.emplace(key, make_upsampler(h, w, desc_.scale)).first;
  return it->second;
}

Tensor SRModel::forward(const ImageBatch& lr) {
  last_input_ = lr;
  Tensor out = body_.forward(lr, nullptr);
  const Tensor skip =
      desc_.scale == 1 ? lr : up_op(lr.h(), lr.w()).apply(lr);
  require_same_shape(out, skip, "sr head/skip");
  double* p = out.data();
  const double* ps = skip.data();
  for (int64_t i = 0, n = out.numel(); i < n; ++i) p[i] += ps[i];
  return out;
}

Tensor SRModel::backward(const Tensor& gy) {
  Tensor gx = body_.backward(gy);
  if (desc_.scale == 1) {
    double* p = gx.data();
    const double* pg = gy.data();
    for (int64_t i = 0, n = gx.numel(); i < n; ++i) p[i] += pg[i];
  } else {
    const Tensor gskip = up_op(last_input_.h(), last_input_.w()).adjoint(gy);
    double* p = gx.data();
    const double* ps = gskip.data();
    for (int64_t i = 0, n = gx.numel(); i < n; ++i) p[i] += ps[i];
  }
  return gx;
}

std::vector<nn::Param*> SRModel::params() { return nn::params_of(body_); }

ImageBatch SRModel::restore(const ImageBatch& lr) { return clamp01(forward(lr)); }

}  // namespace sdsr
