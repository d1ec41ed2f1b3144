#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdsr/data/corpus.hpp"
#include "sdsr/gen/generator.hpp"
#include "sdsr/sr/sr_model.hpp"

namespace sdsr {

enum class Phase { kSynthetic, kReal };

enum class CollabDataMode {
  kPerModel,       // model i trains on its own generator's samples (full CL shape)
  kPooled,         // one model, generators pooled round-robin ("naive combination")
  kCleanBicubic,   // pairs are (bicubic downsample, hr); no generator involved
};

struct CollabConfig {
  double lambda_sup = 1.0;
  double lambda_col = 0.01;
  double lambda_ada = 10.0;
  int64_t ramp_max = 10000;  // P of the ramp schedule
  int64_t steps = 10000;
  int k = 2;
  std::vector<Phase> alternation = {Phase::kSynthetic, Phase::kReal};
  int batch = 4;
  double lr = 1e-4;
  uint64_t seed = 0;
  CollabDataMode data_mode = CollabDataMode::kPerModel;
  int64_t eval_every = 500;
  int64_t pseudo_refresh = 1;  // recompute pseudo-labels every n real steps (1 = live)
};

// r(p, P) = p / P, clamped to 1 past the schedule end.
double ramp(int64_t p, int64_t ramp_max, bool* clamped = nullptr);

// mean absolute error over all elements
double sup_loss(const ImageBatch& pred, const ImageBatch& target);

// sum over j != i of L1(outputs[i][j], outputs[j][j]); the j-targets carry no
// gradient. outputs[i][j] is model i's restoration of generator j's sample.
double collab_loss(const std::vector<std::vector<Tensor>>& outputs, int i_index);

struct PseudoLabel {
  ImageBatch y_hat;
  int teacher_count = 0;
  bool gradient_barrier = true;  // y_hat is always detached
};

PseudoLabel pseudo_label(const std::vector<SRModel*>& models, const ImageBatch& x_real);
PseudoLabel pseudo_label_from_outputs(const std::vector<Tensor>& teacher_outputs);

struct SynthBatch {
  ImageBatch y;                // shared HR target
  std::vector<ImageBatch> x;   // x[j] sampled from generator j (same y)
};

struct RealBatch {
  ImageBatch x;
  PseudoLabel label;
};

struct TotalLossBreakdown {
  double total = 0.0;
  double sup = 0.0;  // unweighted component values
  double col = 0.0;
  double ada = 0.0;
};

// Full three-term objective for model i. The pseudo-label is taken as given
// (gradient barrier); pass nullptr for real when no real batch is in play.
TotalLossBreakdown total_loss(std::vector<SRModel*>& models, int i, const SynthBatch& synth,
                              const RealBatch* real, int64_t p, const CollabConfig& cfg);

// Same objective, but also accumulates d(total)/d(params of model i) into the
// model's gradients. Peer models receive no gradient. This is the exact
// per-model step used by train_collab, exposed for gradient verification.
TotalLossBreakdown accumulate_total_loss_grads(std::vector<SRModel*>& models, int i,
                                               const SynthBatch& synth, const RealBatch* real,
                                               int64_t p, const CollabConfig& cfg);

struct CollabCurveRow {
  int64_t iteration = 0;
  std::vector<double> psnr;  // per model, held-out validation
  double sup = 0.0, col = 0.0, ada = 0.0;
};

struct CollabTrainResult {
  std::vector<CollabCurveRow> curves;
  int64_t steps_done = 0;
  bool aborted = false;  // NaN loss
};

// Alternating synthetic/real training of K SR models against a frozen
// generator ensemble (Fig. 2 style schedule). Per-iteration data seeds are a
// documented contract: HR batches use derive_seed(seed, "collab_hr", p),
// generator samples derive_seed(seed, "collab_x", p * K + j) and real LR
// batches derive_seed(seed, "collab_real", p).
CollabTrainResult train_collab(std::vector<SRModel*>& models, GeneratorEnsemble& ens,
                               const UnpairedCorpus& corpus, const CollabConfig& cfg);

void write_curves_csv(const std::string& path, const std::vector<CollabCurveRow>& curves);

}  // namespace sdsr
