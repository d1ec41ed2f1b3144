#pragma once

#include <memory>
#include <string>
#include <vector>

#include "sdsr/nn/layer.hpp"

namespace sdsr::nn {

// 2-D convolution, square kernel, zero padding k/2, stride 1 or 2.
// Backed by im2col + Eigen GEMM.
class Conv2d : public Layer {
 public:
  // init_gain scales He initialization; 0 gives an all-zero layer (used for
  // heads that should start as the identity around a fixed skip).
  Conv2d(std::string name, int cin, int cout, int ksize, int stride, Rng& init_rng,
         double init_gain = 1.0);

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  void collect_params(std::vector<Param*>& out) override;
  const std::string& name() const override { return name_; }

  int out_size(int in) const { return (in + 2 * pad_ - k_) / stride_ + 1; }
  Param& weight() { return w_; }
  Param& bias() { return b_; }

 private:
  void im2col(const Tensor& x, int n, std::vector<double>& col, int ho, int wo) const;

  std::string name_;
  int cin_, cout_, k_, stride_, pad_;
  Param w_, b_;
  Tensor x_;  // cached input
  mutable std::vector<double> col_;
};

class LeakyReLU : public Layer {
 public:
  explicit LeakyReLU(double slope = 0.2, std::string name = "lrelu")
      : name_(std::move(name)), slope_(slope) {}

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
  double slope_;
  Tensor x_;
};

enum class SigmaMode { kSharedSpatial, kInputDependent };

// Adds Gaussian noise scaled by a learned per-channel standard deviation to
// the incoming feature map. In shared-spatial mode sigma is a free scalar
// per channel (independent of the input); in input-dependent mode a 1x1
// conv head predicts a per-pixel sigma map from the features.
class NoiseInjection : public Layer {
 public:
  NoiseInjection(std::string name, int channels, SigmaMode mode = SigmaMode::kSharedSpatial,
                 Rng* head_init_rng = nullptr);

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  void collect_params(std::vector<Param*>& out) override;
  const std::string& name() const override { return name_; }

  int channels() const { return channels_; }
  SigmaMode mode() const { return mode_; }
  void set_sigma(double v);
  Param& sigma() { return sigma_; }

  // excludes sigma (and the sigma head) from collect_params; the zeroed
  // sigma then stays fixed, giving the deterministic baseline generator
  void set_trainable(bool t) { trainable_ = t; }
  bool trainable() const { return trainable_; }

 private:
  std::string name_;
  int channels_;
  SigmaMode mode_;
  bool trainable_ = true;
  Param sigma_;  // (1, c, 1, 1), shared-spatial mode
  std::unique_ptr<Conv2d> head_;  // input-dependent mode
  Tensor eps_;
  Tensor gate_;  // sigmoid(pre) for input-dependent softplus backward
};

// (n, c*r^2, h, w) -> (n, c, h*r, w*r)
class PixelShuffle : public Layer {
 public:
  explicit PixelShuffle(int r, std::string name = "shuffle") : name_(std::move(name)), r_(r) {}

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
  int r_;
};

class Clamp01 : public Layer {
 public:
  explicit Clamp01(std::string name = "clamp") : name_(std::move(name)) {}

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
  Tensor x_;
};

// x + conv(act(conv(x)))
class ResidualBlock : public Layer {
 public:
  ResidualBlock(std::string name, int channels, Rng& init_rng);

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  void collect_params(std::vector<Param*>& out) override;
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
  Conv2d conv1_, conv2_;
  LeakyReLU act_;
};

// Residual block whose body output is rescaled per channel by a squeeze-
// excitation style gate (global average pool -> 1x1 convs -> sigmoid).
class ChannelAttentionBlock : public Layer {
 public:
  ChannelAttentionBlock(std::string name, int channels, int reduction, Rng& init_rng);

  Tensor forward(const Tensor& x, Rng* rng) override;
  Tensor backward(const Tensor& gy) override;
  void collect_params(std::vector<Param*>& out) override;
  const std::string& name() const override { return name_; }

 private:
  std::string name_;
  int channels_;
  Conv2d conv1_, conv2_, fc1_, fc2_;
  LeakyReLU act_;
  Tensor u_;     // body output
  Tensor gate_;  // (n, c, 1, 1)
  Tensor relu_mask_;
};

}  // namespace sdsr::nn
