#include "sdsr/nn/layer.hpp"

#include <cstring>

namespace sdsr::nn {

Tensor Sequential::forward(const Tensor& x, Rng* rng) {
  Tensor cur = x;
  for (auto& l : layers_) cur = l->forward(cur, rng);
  return cur;
}

Tensor Sequential::backward(const Tensor& gy) {
  Tensor cur = gy;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) cur = (*it)->backward(cur);
  return cur;
}

void Sequential::collect_params(std::vector<Param*>& out) {
  for (auto& l : layers_) l->collect_params(out);
}

std::vector<Param*> params_of(Layer& l) {
  std::vector<Param*> out;
  l.collect_params(out);
  return out;
}

uint64_t param_checksum(const std::vector<Param*>& params) {
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* data, size_t bytes) {
    const uint8_t* p = static_cast<const uint8_t*>(data);
    for (size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const Param* p : params)
    mix(p->value.data(), sizeof(double) * size_t(p->value.numel()));
  return h;
}

int64_t param_count(const std::vector<Param*>& params) {
  int64_t n = 0;
  for (const Param* p : params) n += p->value.numel();
  return n;
}

}  // namespace sdsr::nn
