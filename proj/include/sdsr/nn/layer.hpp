#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sdsr/core/rng.hpp"
#include "sdsr/core/tensor.hpp"

namespace sdsr::nn {

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  explicit Param(std::string n, Shape s) : name(std::move(n)), value(s), grad(s) {}
  void zero_grad() { grad.zero(); }
};

// Training-time layer protocol: forward caches whatever backward needs,
// backward consumes the most recent forward's cache, returns dL/dinput and
// accumulates parameter gradients. Stochastic layers draw from `rng`
// (deterministic layers ignore it).
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor forward(const Tensor& x, Rng* rng) = 0;
  virtual Tensor backward(const Tensor& gy) = 0;
  virtual void collect_params(std::vector<Param*>& out) {}
  virtual const std::string& name() const = 0;
};

class Sequential : public Layer {
 public:
  explicit Sequential(std::string name = "seq") : name_(std::move(name)) {}

  void add(std::unique_ptr<Layer> l) { layers_.push_back(std::move(l)); }
  size_t size() const { return layers_.size(); }
  Layer& layer(size_t i) { return *layers_[i]; }

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  void collect_params(std::vector<Param*>& out) override;
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
  std::vector<std::unique_ptr<Layer>> layers_;
};

std::vector<Param*> params_of(Layer& l);

// FNV-1a over raw parameter bytes; used by freeze / no-cross-write checks.
uint64_t param_checksum(const std::vector<Param*>& params);

int64_t param_count(const std::vector<Param*>& params);

}  // namespace sdsr::nn
