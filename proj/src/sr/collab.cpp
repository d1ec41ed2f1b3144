#include "sdsr/sr/collab.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include "sdsr/core/errors.hpp"
#include "sdsr/metrics/quality.hpp"
#include "sdsr/nn/adam.hpp"

namespace sdsr {

double ramp(int64_t p, int64_t ramp_max, bool* clamped) {
  if (ramp_max < 1) throw ConfigError("ramp: P must be >= 1");
  if (p < 0) throw ConfigError("ramp: p must be >= 0");
  if (clamped) *clamped = false;
  if (p > ramp_max) {
    // past the schedule end (post-schedule fine-tuning): hold at 1
    if (clamped) *clamped = true;
    return 1.0;
  }
  return double(p) / double(ramp_max);
}

double sup_loss(const ImageBatch& pred, const ImageBatch& target) {
  require_same_shape(pred, target, "sup_loss");
  return l1_mean(pred, target);
}

double collab_loss(const std::vector<std::vector<Tensor>>& outputs, int i_index) {
  const int k = int(outputs.size());
  if (i_index < 0 || i_index >= k) throw ConfigError("collab_loss: bad model index");
  double acc = 0.0;
  for (int j = 0; j < k; ++j) {
    if (j == i_index) continue;
    acc += sup_loss(outputs[size_t(i_index)][size_t(j)], outputs[size_t(j)][size_t(j)]);
  }
  return acc;  // k == 1 gives the empty sum, 0
}

PseudoLabel pseudo_label_from_outputs(const std::vector<Tensor>& teacher_outputs) {
  if (teacher_outputs.empty()) throw ConfigError("pseudo_label: empty teacher output list");
  PseudoLabel label;
  label.teacher_count = int(teacher_outputs.size());
  label.y_hat = teacher_outputs.front();
  for (size_t l = 1; l < teacher_outputs.size(); ++l) {
    require_same_shape(label.y_hat, teacher_outputs[l], "pseudo_label");
    double* p = label.y_hat.data();
    const double* q = teacher_outputs[l].data();
    for (int64_t i = 0, n = label.y_hat.numel(); i < n; ++i) p[i] += q[i];
  }
  double* p = label.y_hat.data();
  for (int64_t i = 0, n = label.y_hat.numel(); i < n; ++i)
    p[i] /= double(teacher_outputs.size());
  return label;
}

PseudoLabel pseudo_label(const std::vector<SRModel*>& models, const ImageBatch& x_real) {
  if (models.empty()) throw ConfigError("pseudo_label: empty model list");
  std::vector<Tensor> outs;
  outs.reserve(models.size());
  for (SRModel* m : models) outs.push_back(m->forward(x_real));
  return pseudo_label_from_outputs(outs);
}

namespace {

// d(mean|pred - target|)/d(pred), scaled
Tensor l1_grad(const Tensor& pred, const Tensor& target, double scale) {
  Tensor g(pred.shape());
  const int64_t n = pred.numel();
  const double s = scale / double(n);
  for (int64_t i = 0; i < n; ++i) {
    const double d = pred[i] - target[i];
    g[i] = d > 0.0 ? s : (d < 0.0 ? -s : 0.0);
  }
  return g;
}

void check_collab_inputs(const std::vector<SRModel*>& models, int i, const SynthBatch& synth,
                         const RealBatch* real, int64_t p, const CollabConfig& cfg) {
  const int k = int(models.size());
  if (i < 0 || i >= k) throw ConfigError("total_loss: bad model index");
  if (int(synth.x.size()) != k)
    throw SizingError("total_loss: need one synthetic batch per model, got " +
                      std::to_string(synth.x.size()) + " for k=" + std::to_string(k));
  if (!real && cfg.lambda_ada > 0.0 && ramp(p, cfg.ramp_max) > 0.0)
    throw ConfigError("total_loss: real batch missing while lambda_ada > 0 and ramp > 0");
}

}  // namespace

TotalLossBreakdown total_loss(std::vector<SRModel*>& models, int i, const SynthBatch& synth,
                              const RealBatch* real, int64_t p, const CollabConfig& cfg) {
  check_collab_inputs(models, i, synth, real, p, cfg);
  const int k = int(models.size());
  TotalLossBreakdown out;

  out.sup = sup_loss(models[size_t(i)]->forward(synth.x[size_t(i)]), synth.y);
  for (int j = 0; j < k; ++j) {
    if (j == i) continue;
    const Tensor target = models[size_t(j)]->forward(synth.x[size_t(j)]);
    out.col += sup_loss(models[size_t(i)]->forward(synth.x[size_t(j)]), target);
  }
  const double r = ramp(p, cfg.ramp_max);
  if (real && cfg.lambda_ada > 0.0 && r > 0.0)
    out.ada = sup_loss(models[size_t(i)]->forward(real->x), real->label.y_hat);

  out.total = cfg.lambda_sup * out.sup + cfg.lambda_col * out.col + cfg.lambda_ada * r * out.ada;
  return out;
}

TotalLossBreakdown accumulate_total_loss_grads(std::vector<SRModel*>& models, int i,
                                               const SynthBatch& synth, const RealBatch* real,
                                               int64_t p, const CollabConfig& cfg) {
  check_collab_inputs(models, i, synth, real, p, cfg);
  const int k = int(models.size());
  SRModel& mi = *models[size_t(i)];
  TotalLossBreakdown out;

  {
    const Tensor pred = mi.forward(synth.x[size_t(i)]);
    out.sup = sup_loss(pred, synth.y);
    mi.backward(l1_grad(pred, synth.y, cfg.lambda_sup));
  }
  if (cfg.lambda_col > 0.0) {
    for (int j = 0; j < k; ++j) {
      if (j == i) continue;
      const Tensor target = models[size_t(j)]->forward(synth.x[size_t(j)]);  // no grad back
      const Tensor pred = mi.forward(synth.x[size_t(j)]);
      out.col += sup_loss(pred, target);
      mi.backward(l1_grad(pred, target, cfg.lambda_col));
    }
  }
  const double r = ramp(p, cfg.ramp_max);
  if (real && cfg.lambda_ada > 0.0 && r > 0.0) {
    const Tensor pred = mi.forward(real->x);
    out.ada = sup_loss(pred, real->label.y_hat);
    mi.backward(l1_grad(pred, real->label.y_hat, cfg.lambda_ada * r));
  }
  out.total = cfg.lambda_sup * out.sup + cfg.lambda_col * out.col + cfg.lambda_ada * r * out.ada;
  return out;
}

CollabTrainResult train_collab(std::vector<SRModel*>& models, GeneratorEnsemble& ens,
                               const UnpairedCorpus& corpus, const CollabConfig& cfg) {
  const int k = int(models.size());
  if (k != cfg.k)
    throw ConfigError("train_collab: cfg.k=" + std::to_string(cfg.k) + " but " +
                      std::to_string(k) + " models given");
  if (k < 1) throw ConfigError("train_collab: need at least one model");
  if (cfg.alternation.empty()) throw ConfigError("train_collab: empty alternation pattern");
  const int scale = models[0]->scale();
  for (auto* m : models)
    if (m->scale() != scale) throw ConfigError("train_collab: models must share one scale");
  if (cfg.data_mode == CollabDataMode::kPerModel && ens.size() != k)
    throw ConfigError("train_collab: per-model data needs one generator per model (" +
                      std::to_string(ens.size()) + " generators, " + std::to_string(k) +
                      " models)");
  if (cfg.data_mode != CollabDataMode::kCleanBicubic && ens.size() < 1)
    throw ConfigError("train_collab: generator ensemble is empty");

  bool wants_real = false;
  for (Phase ph : cfg.alternation) wants_real |= (ph == Phase::kReal);
  wants_real = wants_real && cfg.lambda_ada > 0.0;
  if (wants_real && corpus.lr_items.empty())
    throw ConfigError("train_collab: real phase requested but corpus has no real LR items");

  // generators are frozen in this stage; verify by checksum
  std::vector<uint64_t> gen_sums;
  for (int g = 0; g < ens.size(); ++g) {
    auto params = ens.member(g).params();
    gen_sums.push_back(nn::param_checksum(params));
  }

  std::vector<nn::Adam> opts;
  opts.reserve(size_t(k));
  for (auto* m : models) opts.emplace_back(m->params(), cfg.lr);

  CollabTrainResult result;
  const SeparableOp clean_down = make_downsampler(corpus.patch_hr, corpus.patch_hr, scale);

  // staleness cache for pseudo_refresh > 1: the real batch and its label are
  // reused for pseudo_refresh consecutive real steps
  ImageBatch cached_real;
  Tensor cached_label;
  int64_t real_steps_seen = 0;

  double last_sup = 0.0, last_col = 0.0, last_ada = 0.0;
  for (int64_t p = 0; p < cfg.steps; ++p) {
    Phase phase = cfg.alternation[size_t(p % int64_t(cfg.alternation.size()))];
    // real phase kicks in once the ramp is nonzero
    if (phase == Phase::kReal && (cfg.lambda_ada <= 0.0 || ramp(p, cfg.ramp_max) <= 0.0))
      phase = Phase::kSynthetic;

    if (phase == Phase::kSynthetic) {
      const ImageBatch y =
          sample_hr_patch(corpus, derive_seed(cfg.seed, "collab_hr", uint64_t(p)), cfg.batch);
      std::vector<ImageBatch> x(static_cast<size_t>(k));
      if (cfg.data_mode == CollabDataMode::kPerModel) {
        for (int j = 0; j < k; ++j)
          x[size_t(j)] =
              degrade(ens.member(j), y, derive_seed(cfg.seed, "collab_x", uint64_t(p * k + j)));
      } else if (cfg.data_mode == CollabDataMode::kPooled) {
        const int j0 = int(p % int64_t(ens.size()));
        const ImageBatch shared =
            degrade(ens.member(j0), y, derive_seed(cfg.seed, "collab_x", uint64_t(p * k)));
        for (int j = 0; j < k; ++j) x[size_t(j)] = shared;
      } else {
        const ImageBatch shared = clean_down.apply(y);
        for (int j = 0; j < k; ++j) x[size_t(j)] = shared;
      }

      // supervised pass: targets first, then each model's backward on its
      // still-valid cache
      std::vector<Tensor> own(static_cast<size_t>(k));
      double sup_acc = 0.0;
      for (int j = 0; j < k; ++j) own[size_t(j)] = models[size_t(j)]->forward(x[size_t(j)]);
      for (int j = 0; j < k; ++j) {
        sup_acc += sup_loss(own[size_t(j)], y);
        models[size_t(j)]->backward(l1_grad(own[size_t(j)], y, cfg.lambda_sup));
      }
      // collaborative pass: distill from detached peer outputs
      double col_acc = 0.0;
      if (cfg.lambda_col > 0.0 && k >= 2) {
        for (int i = 0; i < k; ++i)
          for (int j = 0; j < k; ++j) {
            if (j == i) continue;
            const Tensor pred = models[size_t(i)]->forward(x[size_t(j)]);
            col_acc += sup_loss(pred, own[size_t(j)]);
            models[size_t(i)]->backward(l1_grad(pred, own[size_t(j)], cfg.lambda_col));
          }
      }
      for (int i = 0; i < k; ++i) {
        opts[size_t(i)].step();
        opts[size_t(i)].zero_grad();
      }
      last_sup = sup_acc / double(k);
      last_col = k >= 2 ? col_acc / double(k) : 0.0;
    } else {
      const int64_t refresh = std::max<int64_t>(1, cfg.pseudo_refresh);
      const bool stale_ok = refresh > 1 && real_steps_seen % refresh != 0 &&
                            !cached_real.empty();
      if (!stale_ok) {
        cached_real = sample_lr_patch(corpus, derive_seed(cfg.seed, "collab_real", uint64_t(p)),
                                      cfg.batch);
        const PseudoLabel label = pseudo_label(models, cached_real);
        cached_label = label.y_hat;
      }
      ++real_steps_seen;

      const double r = ramp(p, cfg.ramp_max);
      double ada_acc = 0.0;
      for (int i = 0; i < k; ++i) {
        const Tensor pred = models[size_t(i)]->forward(cached_real);
        ada_acc += sup_loss(pred, cached_label);
        models[size_t(i)]->backward(l1_grad(pred, cached_label, cfg.lambda_ada * r));
        opts[size_t(i)].step();
        opts[size_t(i)].zero_grad();
      }
      last_ada = ada_acc / double(k);
    }

    if (!std::isfinite(last_sup) || !std::isfinite(last_col) || !std::isfinite(last_ada)) {
      result.aborted = true;
      result.steps_done = p + 1;
      break;
    }

    const bool log_now =
        cfg.eval_every > 0 && ((p + 1) % cfg.eval_every == 0 || p + 1 == cfg.steps);
    if (log_now) {
      CollabCurveRow row;
      row.iteration = p + 1;
      row.sup = last_sup;
      row.col = last_col;
      row.ada = last_ada;
      for (int i = 0; i < k; ++i) {
        double acc = 0.0;
        for (size_t v = 0; v < corpus.val.lr.size(); ++v) {
          const ImageBatch sr = models[size_t(i)]->restore(corpus.val.lr[v]);
          acc += psnr(sr, corpus.val.hr[v]).db;
        }
        row.psnr.push_back(corpus.val.lr.empty() ? 0.0 : acc / double(corpus.val.lr.size()));
      }
      result.curves.push_back(std::move(row));
    }
    result.steps_done = p + 1;
  }

  for (int g = 0; g < ens.size(); ++g) {
    auto params = ens.member(g).params();
    if (nn::param_checksum(params) != gen_sums[size_t(g)])
      throw Error(ExitCode::kFailure, "internal invariant violation: frozen generator '" +
                                          ens.member(g).arch_id() + "' was mutated during SR training");
  }
  return result;
}

void write_curves_csv(const std::string& path, const std::vector<CollabCurveRow>& curves) {
  std::ofstream os(path);
  if (!os) throw Error(ExitCode::kFailure, "cannot write curves: " + path);
  os << "iteration";
  const size_t k = curves.empty() ? 0 : curves.front().psnr.size();
  for (size_t i = 0; i < k; ++i) os << ",psnr_m" << i;
  os << ",sup_loss,col_loss,ada_loss\n";
  os.precision(17);
  for (const auto& r : curves) {
    os << r.iteration;
    for (double v : r.psnr) os << "," << v;
    os << "," << r.sup << "," << r.col << "," << r.ada << "\n";
  }
}

}  // namespace sdsr
