#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "sdsr/data/corpus.hpp"
#include "sdsr/gen/generator.hpp"
#include "sdsr/nn/adam.hpp"

namespace sdsr {

// Patch-level binary classifier over LR-sized inputs, ~13 px receptive
// field; noise statistics are local so no global pooling.
class Discriminator {
 public:
  Discriminator(int width, uint64_t init_seed);

  Tensor forward(const Tensor& x);  // spatial logit map (n, 1, h, w)
  Tensor backward(const Tensor& gy);
  std::vector<nn::Param*> params();

 private:
  nn::Sequential net_;
};

struct GanLossValues {
  double g = 0.0;  // mean((d_fake - 1)^2)
  double d = 0.0;  // mean((d_real - 1)^2) + mean(d_fake^2)
};

// Least-squares GAN objectives. Throws NumericError on non-finite logits.
GanLossValues gan_losses(const Tensor& d_real, const Tensor& d_fake);

// L1 between Gaussian-blurred upsample(lr_fake) and Gaussian-blurred hr:
// pins the low-frequency content while leaving high-frequency noise free.
double cycle_loss(const ImageBatch& hr, const ImageBatch& lr_fake, double blur_std);

struct DegraderTrainConfig {
  double adv_weight = 1.0;
  double cycle_weight = 10.0;
  double lowpass_weight = 1.0;  // LR-scale low-pass anchor to the clean downsample
  double blur_std = 2.0;
  int64_t steps = 2000;
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.999;
  int batch = 4;
  uint64_t seed = 0;
  double divergence_threshold = 1e4;
  int64_t snapshot_every = 100;  // cadence of the last-good parameter snapshot
};

struct DegraderLogRow {
  int64_t step = 0;
  double g_loss = 0.0;  // total weighted generator objective
  double d_loss = 0.0;
  double cycle = 0.0;
};

struct DegraderTrainResult {
  std::vector<DegraderLogRow> log;
  bool diverged = false;
  int64_t abort_step = -1;  // step at which divergence was detected
};

// Alternating 1:1 D/G updates. On divergence the generator is rolled back to
// the last good snapshot and the result is flagged; callers persist that
// state as the retained checkpoint. Deterministic for a fixed config.
DegraderTrainResult train_degrader(DegradationGenerator& gen, Discriminator& disc,
                                   const UnpairedCorpus& corpus,
                                   const DegraderTrainConfig& cfg);

// Independent training of every ensemble member (own discriminator, own
// seed). Member failures are rethrown with the member index.
std::vector<DegraderTrainResult> train_ensemble(GeneratorEnsemble& ens,
                                                const UnpairedCorpus& corpus,
                                                const DegraderTrainConfig& cfg);

void write_degrader_log_csv(const std::string& path, const std::vector<DegraderLogRow>& log);

}  // namespace sdsr
