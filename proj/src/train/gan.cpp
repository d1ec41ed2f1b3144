#include "sdsr/train/gan.hpp"

#include <cmath>
#include <fstream>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/resample.hpp"

namespace sdsr {

using nn::Conv2d;
using nn::LeakyReLU;

Discriminator::Discriminator(int width, uint64_t init_seed) : net_("disc") {
  Rng rng(derive_seed(init_seed, "disc_init"));
  net_.add(std::make_unique<Conv2d>("disc.c0", 3, width, 3, 1, rng));
  net_.add(std::make_unique<LeakyReLU>(0.2, "disc.a0"));
  net_.add(std::make_unique<Conv2d>("disc.c1", width, width, 3, 2, rng));
  net_.add(std::make_unique<LeakyReLU>(0.2, "disc.a1"));
  net_.add(std::make_unique<Conv2d>("disc.c2", width, width, 3, 1, rng));
  net_.add(std::make_unique<LeakyReLU>(0.2, "disc.a2"));
  net_.add(std::make_unique<Conv2d>("disc.c3", width, 1, 3, 1, rng));
}

Tensor Discriminator::forward(const Tensor& x) { return net_.forward(x, nullptr); }
Tensor Discriminator::backward(const Tensor& gy) { return net_.backward(gy); }
std::vector<nn::Param*> Discriminator::params() { return nn::params_of(net_); }

GanLossValues gan_losses(const Tensor& d_real, const Tensor& d_fake) {
  require_same_shape(d_real, d_fake, "gan_losses");
  if (!d_real.all_finite() || !d_fake.all_finite())
    throw NumericError("gan_losses: non-finite logits (d_real range [" +
                       std::to_string(d_real.min()) + "," + std::to_string(d_real.max()) +
                       "], d_fake range [" + std::to_string(d_fake.min()) + "," +
                       std::to_string(d_fake.max()) + "])");
  GanLossValues v;
  const int64_t n = d_real.numel();
  double dr = 0.0, df = 0.0, g = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    const double r1 = d_real[i] - 1.0;
    dr += r1 * r1;
    df += d_fake[i] * d_fake[i];
    const double f1 = d_fake[i] - 1.0;
    g += f1 * f1;
  }
  v.d = dr / double(n) + df / double(n);
  v.g = g / double(n);
  return v;
}

double cycle_loss(const ImageBatch& hr, const ImageBatch& lr_fake, double blur_std) {
  if (hr.h() % lr_fake.h() != 0 || hr.w() % lr_fake.w() != 0 ||
      hr.h() / lr_fake.h() != hr.w() / lr_fake.w())
    throw SizingError("cycle_loss: lr dims " + lr_fake.shape().str() +
                      " are not an integer reduction of hr dims " + hr.shape().str());
  const int scale = hr.h() / lr_fake.h();
  const Tensor up = bicubic_upsample(lr_fake, scale);
  return l1_mean(gaussian_blur(up, blur_std), gaussian_blur(hr, blur_std));
}

namespace {

// full cycle/low-pass machinery with gradients wrt the fake LR image
struct ContentLoss {
  SeparableOp up, blur_hr, blur_lr;
  Tensor clean;  // blurred clean downsample, fixed per batch

  ContentLoss(int hr_h, int hr_w, int scale, double blur_std)
      : up(make_upsampler(hr_h / scale, hr_w / scale, scale)),
        blur_hr(make_blur(hr_h, hr_w, blur_std)),
        blur_lr(make_blur(hr_h / scale, hr_w / scale, blur_std)) {}

  // mean|blur(up(fake)) - blur(hr)|; grad accumulated into gfake
  double cycle(const Tensor& hr, const Tensor& fake, double weight, Tensor* gfake) const {
    const Tensor a = blur_hr.apply(up.apply(fake));
    const Tensor b = blur_hr.apply(hr);
    const int64_t n = a.numel();
    double loss = 0.0;
    Tensor sign(a.shape());
    for (int64_t i = 0; i < n; ++i) {
      const double d = a[i] - b[i];
      loss += std::abs(d);
      sign[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / double(n);
    }
    if (gfake && weight != 0.0) {
      const Tensor g = up.adjoint(blur_hr.adjoint(sign));
      for (int64_t i = 0; i < g.numel(); ++i) (*gfake)[i] += weight * g[i];
    }
    return loss / double(n);
  }

  // mean|blur_lr(fake) - blur_lr(clean_downsample)|
  double lowpass(const Tensor& clean_down, const Tensor& fake, double weight,
                 Tensor* gfake) const {
    const Tensor a = blur_lr.apply(fake);
    const Tensor b = blur_lr.apply(clean_down);
    const int64_t n = a.numel();
    double loss = 0.0;
    Tensor sign(a.shape());
    for (int64_t i = 0; i < n; ++i) {
      const double d = a[i] - b[i];
      loss += std::abs(d);
      sign[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / double(n);
    }
    if (gfake && weight != 0.0) {
      const Tensor g = blur_lr.adjoint(sign);
      for (int64_t i = 0; i < g.numel(); ++i) (*gfake)[i] += weight * g[i];
    }
    return loss / double(n);
  }
};

struct ParamSnapshot {
  std::vector<Tensor> values;

  explicit ParamSnapshot(const std::vector<nn::Param*>& params) { take(params); }
  void take(const std::vector<nn::Param*>& params) {
    values.clear();
    for (const nn::Param* p : params) values.push_back(p->value);
  }
  void restore(const std::vector<nn::Param*>& params) const {
    for (size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
  }
};

}  // namespace

DegraderTrainResult train_degrader(DegradationGenerator& gen, Discriminator& disc,
                                   const UnpairedCorpus& corpus,
                                   const DegraderTrainConfig& cfg) {
  if (cfg.steps < 0) throw ConfigError("train_degrader: steps must be >= 0");
  if (cfg.adv_weight < 0 || cfg.cycle_weight < 0 || cfg.lowpass_weight < 0)
    throw ConfigError("train_degrader: loss weights must be >= 0");
  DegraderTrainResult result;
  if (cfg.steps == 0) return result;
  if (corpus.hr_items.empty() || corpus.lr_items.empty())
    throw ConfigError("train_degrader: corpus must be non-empty on both sides");

  const int patch = corpus.patch_hr;
  const int scale = gen.scale();
  auto gen_params = gen.params();
  auto disc_params = disc.params();
  nn::Adam g_opt(gen_params, cfg.lr, cfg.beta1, cfg.beta2);
  nn::Adam d_opt(disc_params, cfg.lr, cfg.beta1, cfg.beta2);
  ContentLoss content(patch, patch, scale, cfg.blur_std);
  const SeparableOp down = make_downsampler(patch, patch, scale);

  ParamSnapshot last_good(gen_params);
  result.log.reserve(size_t(cfg.steps));

  for (int64_t step = 0; step < cfg.steps; ++step) {
    const ImageBatch hr = sample_hr_patch(corpus, derive_seed(cfg.seed, "deg_hr", uint64_t(step)),
                                          cfg.batch);
    const ImageBatch real =
        sample_lr_patch(corpus, derive_seed(cfg.seed, "deg_lr", uint64_t(step)), cfg.batch);

    Rng noise(derive_seed(cfg.seed, "deg_noise", uint64_t(step)));
    const Tensor fake = gen.forward(hr, noise);

    // loss values on the pre-update networks
    const Tensor d_real = disc.forward(real);
    const Tensor d_fake = disc.forward(fake);
    const GanLossValues gan = gan_losses(d_real, d_fake);

    // discriminator update
    if (cfg.adv_weight > 0.0) {
      d_opt.zero_grad();
      const int64_t nr = d_real.numel();
      Tensor gr(d_real.shape());
      for (int64_t i = 0; i < nr; ++i) gr[i] = 2.0 * (d_real[i] - 1.0) / double(nr);
      disc.forward(real);
      disc.backward(gr);
      Tensor gf(d_fake.shape());
      for (int64_t i = 0; i < nr; ++i) gf[i] = 2.0 * d_fake[i] / double(nr);
      disc.forward(fake);
      disc.backward(gf);
      d_opt.step();
    }

    // generator update
    g_opt.zero_grad();
    d_opt.zero_grad();  // discard spill from the adversarial pass below
    Tensor gfake(fake.shape());
    double adv = 0.0;
    if (cfg.adv_weight > 0.0) {
      const Tensor d_fake_g = disc.forward(fake);
      const int64_t nf = d_fake_g.numel();
      Tensor gl(d_fake_g.shape());
      double acc = 0.0;
      for (int64_t i = 0; i < nf; ++i) {
        const double f1 = d_fake_g[i] - 1.0;
        acc += f1 * f1;
        gl[i] = 2.0 * f1 / double(nf);
      }
      adv = acc / double(nf);
      const Tensor ga = disc.backward(gl);
      for (int64_t i = 0; i < gfake.numel(); ++i) gfake[i] = cfg.adv_weight * ga[i];
    }
    const Tensor clean_down = down.apply(hr);
    const double cyc = content.cycle(hr, fake, cfg.cycle_weight, &gfake);
    const double lp = content.lowpass(clean_down, fake, cfg.lowpass_weight, &gfake);
    gen.backward(gfake);
    g_opt.step();

    DegraderLogRow row;
    row.step = step;
    row.g_loss = cfg.adv_weight * adv + cfg.cycle_weight * cyc + cfg.lowpass_weight * lp;
    row.d_loss = gan.d;
    row.cycle = cyc;
    result.log.push_back(row);

    const bool bad = !std::isfinite(row.g_loss) || !std::isfinite(row.d_loss) ||
                     row.g_loss > cfg.divergence_threshold ||
                     row.d_loss > cfg.divergence_threshold;
    if (bad) {
      last_good.restore(gen_params);
      result.diverged = true;
      result.abort_step = step;
      return result;
    }
    if (cfg.snapshot_every > 0 && (step + 1) % cfg.snapshot_every == 0)
      last_good.take(gen_params);
  }
  return result;
}

std::vector<DegraderTrainResult> train_ensemble(GeneratorEnsemble& ens,
                                                const UnpairedCorpus& corpus,
                                                const DegraderTrainConfig& cfg) {
  if (ens.size() < 1) throw ConfigError("train_ensemble: empty ensemble");
  std::vector<DegraderTrainResult> results;
  for (int k = 0; k < ens.size(); ++k) {
    DegraderTrainConfig member_cfg = cfg;
    member_cfg.seed = derive_seed(cfg.seed, "ensemble_train", uint64_t(k));
    Discriminator disc(24, derive_seed(cfg.seed, "ensemble_disc", uint64_t(k)));
    try {
      results.push_back(train_degrader(ens.member(k), disc, corpus, member_cfg));
    } catch (const std::exception& e) {
      throw Error(ExitCode::kFailure,
                  "ensemble member " + std::to_string(k) + " (" + ens.member(k).arch_id() +
                      ") failed: " + e.what());
    }
  }
  return results;
}

void write_degrader_log_csv(const std::string& path, const std::vector<DegraderLogRow>& log) {
  std::ofstream os(path);
  if (!os) throw Error(ExitCode::kFailure, "cannot write log: " + path);
  os << "step,g_loss,d_loss,cycle_loss\n";
  os.precision(17);
  for (const auto& r : log)
    os << r.step << "," << r.g_loss << "," << r.d_loss << "," << r.cycle << "\n";
}

}  // namespace sdsr
