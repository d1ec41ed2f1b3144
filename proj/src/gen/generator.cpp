#include "sdsr/gen/generator.hpp"

#include <algorithm>
#include <cmath>

#include "sdsr/core/errors.hpp"

namespace sdsr {

using nn::Conv2d;
using nn::LeakyReLU;
using nn::NoiseInjection;
using nn::SigmaMode;

const std::vector<std::string>& DegradationGenerator::families() {
  static const std::vector<std::string> kFamilies = {"residual-chain", "attention-strided"};
  return kFamilies;
}

namespace {

int log2_scale(int scale, const std::string& where) {
  if (scale == 1) return 0;
  if (scale == 2) return 1;
  if (scale == 4) return 2;
  throw ConfigError(where + ": scale must be 1, 2 or 4, got " + std::to_string(scale));
}

std::vector<std::unique_ptr<nn::Layer>> build_residual_chain(const GeneratorDesc& d, Rng& rng) {
  // stem conv -> 4 residual blocks (noise injection after each)
  // -> stride-2 downsampling convs -> low-gain head over the bicubic skip
  const int w = d.width;
  const std::string& id = d.arch_id;
  std::vector<std::unique_ptr<nn::Layer>> s;
  s.push_back(std::make_unique<Conv2d>(id + ".stem", 3, w, 3, 1, rng));
  s.push_back(std::make_unique<LeakyReLU>(0.2, id + ".stem_act"));
  for (int b = 0; b < 4; ++b) {
    s.push_back(std::make_unique<nn::ResidualBlock>(id + ".rb" + std::to_string(b), w, rng));
    s.push_back(std::make_unique<NoiseInjection>(id + ".inj" + std::to_string(b), w,
                                                 d.sigma_mode, &rng));
  }
  for (int k = 0; k < log2_scale(d.scale, id); ++k) {
    s.push_back(std::make_unique<Conv2d>(id + ".down" + std::to_string(k), w, w, 3, 2, rng));
    s.push_back(std::make_unique<LeakyReLU>(0.2, id + ".down_act" + std::to_string(k)));
  }
  s.push_back(std::make_unique<Conv2d>(id + ".head", w, 3, 3, 1, rng, 0.1));
  return s;
}

std::vector<std::unique_ptr<nn::Layer>> build_attention_strided(const GeneratorDesc& d,
                                                                Rng& rng) {
  // strided convs up front (blocks run at LR resolution)
  // -> 3 channel-attention blocks with injections -> low-gain head
  const int w = d.width;
  const std::string& id = d.arch_id;
  const int n_strided = log2_scale(d.scale, id);
  std::vector<std::unique_ptr<nn::Layer>> s;
  s.push_back(std::make_unique<Conv2d>(id + ".stem0", 3, w, 3, n_strided >= 1 ? 2 : 1, rng));
  s.push_back(std::make_unique<LeakyReLU>(0.2, id + ".stem0_act"));
  s.push_back(std::make_unique<Conv2d>(id + ".stem1", w, w, 3, n_strided >= 2 ? 2 : 1, rng));
  s.push_back(std::make_unique<LeakyReLU>(0.2, id + ".stem1_act"));
  for (int b = 0; b < 3; ++b) {
    s.push_back(
        std::make_unique<nn::ChannelAttentionBlock>(id + ".ca" + std::to_string(b), w, 4, rng));
    s.push_back(std::make_unique<NoiseInjection>(id + ".inj" + std::to_string(b), w,
                                                 d.sigma_mode, &rng));
  }
  s.push_back(std::make_unique<Conv2d>(id + ".head", w, 3, 3, 1, rng, 0.1));
  return s;
}

}  // namespace

DegradationGenerator::DegradationGenerator(const GeneratorDesc& desc)
    : arch_id_(desc.arch_id.empty() ? desc.family : desc.arch_id),
      scale_(desc.scale),
      content_skip_(desc.content_skip),
      clamp_output_(desc.clamp_output),
      body_(arch_id_) {
  Rng rng(derive_seed(desc.init_seed, "gen_init"));
  GeneratorDesc d = desc;
  d.arch_id = arch_id_;
  std::vector<std::unique_ptr<nn::Layer>> stages;
  if (desc.family == "residual-chain") {
    stages = build_residual_chain(d, rng);
  } else if (desc.family == "attention-strided") {
    stages = build_attention_strided(d, rng);
  } else {
    std::string valid;
    for (const auto& f : families()) valid += (valid.empty() ? "" : ", ") + f;
    throw ConfigError("unknown generator family '" + desc.family + "' (valid: " + valid + ")");
  }
  for (auto& l : stages) body_.add(std::move(l));
}

DegradationGenerator::DegradationGenerator(std::string arch_id, int scale,
                                           std::vector<std::unique_ptr<nn::Layer>> stages,
                                           bool content_skip, bool clamp_output)
    : arch_id_(std::move(arch_id)),
      scale_(scale),
      content_skip_(content_skip),
      clamp_output_(clamp_output),
      body_(arch_id_) {
  for (auto& l : stages) body_.add(std::move(l));
}

const SeparableOp& DegradationGenerator::skip_op(int h, int w) const {
  auto key = std::make_pair(h, w);
  auto it = skip_cache_.find(key);
  if (it == skip_cache_.end())
    it = skip_cache_.emplace(key, make_downsampler(h, w, scale_)).first;
  return it->second;
}

Tensor DegradationGenerator::forward(const ImageBatch& hr, Rng& rng) {
  if (hr.h() % scale_ != 0 || hr.w() % scale_ != 0)
    throw SizingError(arch_id_ + ": input dims " + hr.shape().str() +
                      " not divisible by scale " + std::to_string(scale_));
  last_input_ = hr;
  Tensor out = body_.forward(hr, &rng);
  if (content_skip_) {
    const Tensor skip = skip_op(hr.h(), hr.w()).apply(hr);
    require_same_shape(out, skip, "generator head/skip");
    double* p = out.data();
    const double* ps = skip.data();
    for (int64_t i = 0, n = out.numel(); i < n; ++i) p[i] += ps[i];
  }
  if (clamp_output_) {
    pre_clamp_ = out;
    out = clamp01(out);
  }
  return out;
}

Tensor DegradationGenerator::backward(const Tensor& gy) {
  Tensor g = gy;
  if (clamp_output_) {
    double* p = g.data();
    const double* pre = pre_clamp_.data();
    for (int64_t i = 0, n = g.numel(); i < n; ++i)
      if (pre[i] <= 0.0 || pre[i] >= 1.0) p[i] = 0.0;
  }
  Tensor gx = body_.backward(g);
  if (content_skip_) {
    const Tensor gskip = skip_op(last_input_.h(), last_input_.w()).adjoint(g);
    double* p = gx.data();
    const double* ps = gskip.data();
    for (int64_t i = 0, n = gx.numel(); i < n; ++i) p[i] += ps[i];
  }
  return gx;
}

std::vector<nn::Param*> DegradationGenerator::params() {
  std::vector<nn::Param*> out;
  body_.collect_params(out);
  return out;
}

std::vector<NoiseInjection*> DegradationGenerator::injections() {
  std::vector<NoiseInjection*> out;
  for (size_t i = 0; i < body_.size(); ++i)
    if (auto* inj = dynamic_cast<NoiseInjection*>(&body_.layer(i))) out.push_back(inj);
  return out;
}

void DegradationGenerator::set_sigma(double v) {
  for (auto* inj : injections()) inj->set_sigma(v);
}

void DegradationGenerator::freeze_deterministic() {
  sigma_frozen_ = true;
  for (auto* inj : injections()) {
    inj->set_sigma(0.0);
    inj->set_trainable(false);
  }
}

int DegradationGenerator::injection_count() const {
  return int(const_cast<DegradationGenerator*>(this)->injections().size());
}

ImageBatch degrade(DegradationGenerator& gen, const ImageBatch& hr, uint64_t rng_seed) {
  Rng rng(derive_seed(rng_seed, "degrade"));
  return gen.forward(hr, rng);
}

MeanStdImages degrade_expected(DegradationGenerator& gen, const ImageBatch& hr, int n_samples,
                               uint64_t rng_seed) {
  if (n_samples < 2)
    throw ConfigError("degrade_expected needs n_samples >= 2, got " + std::to_string(n_samples));
  // moments shifted by the first sample: identical draws give exactly zero std
  Tensor first, sum_d, sum_d2;
  for (int s = 0; s < n_samples; ++s) {
    const Tensor x = degrade(gen, hr, derive_seed(rng_seed, "expected", uint64_t(s)));
    if (s == 0) {
      first = x;
      sum_d = Tensor(x.shape());
      sum_d2 = Tensor(x.shape());
      continue;
    }
    const double* p = x.data();
    const double* p0 = first.data();
    double* ps = sum_d.data();
    double* pq = sum_d2.data();
    for (int64_t i = 0, n = x.numel(); i < n; ++i) {
      const double d = p[i] - p0[i];
      ps[i] += d;
      pq[i] += d * d;
    }
  }
  MeanStdImages out;
  out.mean = Tensor(first.shape());
  out.std = Tensor(first.shape());
  const double n = double(n_samples);
  for (int64_t i = 0, m = first.numel(); i < m; ++i) {
    out.mean[i] = first[i] + sum_d[i] / n;
    const double var = std::max(0.0, (sum_d2[i] - sum_d[i] * sum_d[i] / n) / (n - 1.0));
    out.std[i] = std::sqrt(var);
  }
  return out;
}

GeneratorEnsemble build_ensemble(const std::vector<GeneratorDesc>& specs) {
  if (specs.empty()) throw ConfigError("build_ensemble: need at least one generator spec");
  GeneratorEnsemble ens;
  int shared_scale = specs.front().scale;
  for (size_t i = 0; i < specs.size(); ++i) {
    GeneratorDesc d = specs[i];
    if (d.scale != shared_scale)
      throw ConfigError("build_ensemble: all members must share one scale");
    if (d.arch_id.empty()) d.arch_id = d.family + "-g" + std::to_string(i);
    d.init_seed = derive_seed(d.init_seed, "ensemble_member", uint64_t(i));
    ens.members.push_back(std::make_unique<DegradationGenerator>(d));
  }
  for (size_t i = 0; i < ens.members.size(); ++i)
    for (size_t j = i + 1; j < ens.members.size(); ++j)
      if (ens.members[i]->arch_id() == ens.members[j]->arch_id())
        throw ConfigError("build_ensemble: duplicate arch_id '" + ens.members[i]->arch_id() +
                          "'");
  return ens;
}

std::unique_ptr<DegradationGenerator> build_injection_probe(int channels, double sigma,
                                                            bool clamp_output) {
  std::vector<std::unique_ptr<nn::Layer>> stages;
  stages.push_back(std::make_unique<NoiseInjection>("probe.inj", channels));
  auto gen = std::make_unique<DegradationGenerator>("injection-probe", 1, std::move(stages),
                                                    /*content_skip=*/false, clamp_output);
  gen->set_sigma(sigma);
  return gen;
}

}  // namespace sdsr
