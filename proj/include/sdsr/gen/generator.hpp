#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sdsr/core/resample.hpp"
#include "sdsr/nn/layers.hpp"

namespace sdsr {

struct GeneratorDesc {
  std::string family;  // "residual-chain" | "attention-strided"
  std::string arch_id;
  int scale = 4;
  int width = 16;
  nn::SigmaMode sigma_mode = nn::SigmaMode::kSharedSpatial;
  bool content_skip = true;   // add the fixed bicubic downsample at the head
  bool clamp_output = true;   // clamp to [0,1] at the final head only
  uint64_t init_seed = 0;
};

// Probabilistic HR->LR degradation generator: a feed-forward chain of
// feature blocks with a learned noise injection after every block. With all
// sigma zero the forward pass is a pure function of the input; any nonzero
// sigma makes it an ancestral sampler over the injected latents.
class DegradationGenerator {
 public:
  static const std::vector<std::string>& families();

  explicit DegradationGenerator(const GeneratorDesc& desc);

  // direct assembly for probes and tests
  DegradationGenerator(std::string arch_id, int scale,
                       std::vector<std::unique_ptr<nn::Layer>> stages, bool content_skip,
                       bool clamp_output);

  // one seeded ancestral sample; forward caches stay valid for backward()
  Tensor forward(const ImageBatch& hr, Rng& rng);
  Tensor backward(const Tensor& gy);

  std::vector<nn::Param*> params();
  std::vector<nn::NoiseInjection*> injections();
  void set_sigma(double v);
  // freeze all sigma at zero and drop them from params(): the deterministic
  // baseline arm
  void freeze_deterministic();
  bool sigma_frozen() const { return sigma_frozen_; }

  const std::string& arch_id() const { return arch_id_; }
  int scale() const { return scale_; }
  int injection_count() const;

 private:
  const SeparableOp& skip_op(int h, int w) const;

  std::string arch_id_;
  int scale_ = 4;
  bool content_skip_ = true;
  bool clamp_output_ = true;
  bool sigma_frozen_ = false;
  nn::Sequential body_;
  Tensor pre_clamp_;
  Tensor last_input_;
  mutable std::map<std::pair<int, int>, SeparableOp> skip_cache_;
};

struct GeneratorEnsemble {
  std::vector<std::unique_ptr<DegradationGenerator>> members;

  int size() const { return int(members.size()); }
  DegradationGenerator& member(int i) { return *members[size_t(i)]; }
};

// [OP] degrade: one sample from p(lr | hr) with a caller-owned seed.
ImageBatch degrade(DegradationGenerator& gen, const ImageBatch& hr, uint64_t rng_seed);

struct MeanStdImages {
  Tensor mean;
  Tensor std;
};

// Monte-Carlo mean / per-pixel std over n seeded draws.
MeanStdImages degrade_expected(DegradationGenerator& gen, const ImageBatch& hr, int n_samples,
                               uint64_t rng_seed);

// K generators with pairwise distinct arch ids and independent inits.
GeneratorEnsemble build_ensemble(const std::vector<GeneratorDesc>& specs);

// test rig: single injection site feeding a unit-gain head at `scale` 1
std::unique_ptr<DegradationGenerator> build_injection_probe(int channels, double sigma,
                                                            bool clamp_output = false);

}  // namespace sdsr
