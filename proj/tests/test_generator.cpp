#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdsr/core/errors.hpp"
#include "sdsr/data/textures.hpp"
#include "sdsr/gen/generator.hpp"
#include "support/gradcheck.hpp"

using namespace sdsr;

namespace {

GeneratorDesc desc_of(const std::string& family, uint64_t seed, int width = 8) {
  GeneratorDesc d;
  d.family = family;
  d.arch_id = family + "-t";
  d.scale = 4;
  d.width = width;
  d.init_seed = seed;
  return d;
}

}  // namespace

TEST_CASE("degrade shape and range contract") {
  const ImageBatch hr = make_texture(64, 3, 1, 0);
  for (const auto& family : DegradationGenerator::families()) {
    DegradationGenerator gen(desc_of(family, 11));
    const ImageBatch lr = degrade(gen, hr, 3);
    CHECK(lr.shape() == Shape{1, 3, 16, 16});
    CHECK(lr.min() >= 0.0);
    CHECK(lr.max() <= 1.0);
  }
}

TEST_CASE("sigma zero reduces to a pure function of the input") {
  const ImageBatch hr = make_texture(64, 3, 2, 0);
  for (const auto& family : DegradationGenerator::families()) {
    DegradationGenerator gen(desc_of(family, 12));
    gen.set_sigma(0.0);
    const ImageBatch first = degrade(gen, hr, 100);
    for (uint64_t seed = 101; seed < 105; ++seed) {
      CAPTURE(family);
      CHECK(bit_equal(first, degrade(gen, hr, seed)));
    }
  }
}

TEST_CASE("nonzero sigma gives distinct seeded samples") {
  const ImageBatch hr = make_texture(64, 3, 3, 0);
  for (const auto& family : DegradationGenerator::families()) {
    DegradationGenerator gen(desc_of(family, 13));
    gen.set_sigma(0.05);
    const ImageBatch a = degrade(gen, hr, 7);
    const ImageBatch b = degrade(gen, hr, 7);
    const ImageBatch c = degrade(gen, hr, 8);
    CHECK(bit_equal(a, b));  // same seed, same sample
    CHECK(l1_mean(a, c) > 1e-8);  // stochastic non-degeneracy
  }
}

TEST_CASE("non-divisible input is a sizing error") {
  DegradationGenerator gen(desc_of("residual-chain", 14));
  Tensor hr(1, 3, 30, 32, 0.5);
  CHECK_THROWS_AS(degrade(gen, hr, 1), SizingError);
}

TEST_CASE("degrade_expected") {
  SUBCASE("zero sigma gives exactly zero std") {
    DegradationGenerator gen(desc_of("residual-chain", 15));
    gen.set_sigma(0.0);
    const ImageBatch hr = make_texture(32, 3, 4, 0);
    const MeanStdImages ms = degrade_expected(gen, hr, 16, 5);
    CHECK(ms.std.max() == 0.0);
    CHECK(ms.std.min() == 0.0);
  }
  SUBCASE("n_samples < 2 rejected") {
    DegradationGenerator gen(desc_of("residual-chain", 15));
    const ImageBatch hr = make_texture(32, 3, 4, 0);
    CHECK_THROWS_AS(degrade_expected(gen, hr, 1, 5), ConfigError);
  }
  SUBCASE("single injection through a unit-gain head calibrates to sigma") {
    auto gen = build_injection_probe(3, 0.1);
    Tensor hr(1, 3, 8, 8, 0.5);
    const MeanStdImages ms = degrade_expected(*gen, hr, 10000, 42);
    for (int64_t i = 0; i < ms.std.numel(); ++i) {
      CHECK(ms.std[i] > 0.095);
      CHECK(ms.std[i] < 0.105);
    }
    // CLT bound on the Monte-Carlo mean: |mean - deterministic| < 3*sigma/sqrt(n)
    gen->set_sigma(0.0);
    const ImageBatch det = degrade(*gen, hr, 1);
    const double bound = 3.0 * 0.1 / std::sqrt(10000.0);
    CHECK(max_abs_diff(ms.mean, det) < bound);
  }
}

TEST_CASE("build_ensemble") {
  SUBCASE("two families give a k=2 ensemble with distinct arch ids") {
    std::vector<GeneratorDesc> specs = {desc_of("residual-chain", 1), desc_of("attention-strided", 1)};
    specs[0].arch_id.clear();
    specs[1].arch_id.clear();
    GeneratorEnsemble ens = build_ensemble(specs);
    CHECK(ens.size() == 2);
    CHECK(ens.member(0).arch_id() != ens.member(1).arch_id());
    CHECK(ens.member(0).scale() == ens.member(1).scale());
  }
  SUBCASE("k=1 degenerates to the single-generator baseline") {
    GeneratorEnsemble ens = build_ensemble({desc_of("residual-chain", 2)});
    CHECK(ens.size() == 1);
  }
  SUBCASE("unknown family lists the valid ones") {
    GeneratorDesc bad = desc_of("resnet", 3);
    CHECK_THROWS_WITH_AS(build_ensemble({bad}), doctest::Contains("residual-chain"),
                         ConfigError);
  }
  SUBCASE("different init seeds give different parameters somewhere") {
    std::vector<GeneratorDesc> specs = {desc_of("residual-chain", 100),
                                        desc_of("residual-chain", 200)};
    specs[1].arch_id = "residual-chain-t2";
    GeneratorEnsemble ens = build_ensemble(specs);
    auto pa = ens.member(0).params();
    auto pb = ens.member(1).params();
    REQUIRE(pa.size() == pb.size());
    bool any_diff = false;
    for (size_t i = 0; i < pa.size(); ++i)
      if (!bit_equal(pa[i]->value, pb[i]->value)) any_diff = true;
    CHECK(any_diff);
  }
}

TEST_CASE("injection sites follow the block count") {
  DegradationGenerator res(desc_of("residual-chain", 6));
  CHECK(res.injection_count() == 4);
  DegradationGenerator att(desc_of("attention-strided", 6));
  CHECK(att.injection_count() == 3);
}

TEST_CASE("deterministic freeze removes sigma from the trainable set") {
  DegradationGenerator gen(desc_of("residual-chain", 7));
  const size_t with_sigma = gen.params().size();
  gen.freeze_deterministic();
  CHECK(gen.params().size() == with_sigma - 4);
  const ImageBatch hr = make_texture(32, 3, 5, 0);
  CHECK(bit_equal(degrade(gen, hr, 1), degrade(gen, hr, 2)));
}

TEST_CASE("degrade-through-noise gradients match finite differences") {
  // seeded sample, MSE against a fixed target, gradients of blocks and sigma
  for (const auto& family : DegradationGenerator::families()) {
    CAPTURE(family);
    GeneratorDesc d = desc_of(family, 21, 6);
    d.clamp_output = false;  // keep the probe interior-smooth
    DegradationGenerator gen(d);
    gen.set_sigma(0.05);
    const ImageBatch hr = make_texture(16, 3, 6, 0);
    Tensor target(1, 3, 4, 4, 0.4);
    const uint64_t noise_seed = 91;

    auto loss = [&]() {
      Rng rng(noise_seed);
      const Tensor out = gen.forward(hr, rng);
      return mse(out, target);
    };

    auto params = gen.params();
    for (auto* p : params) p->zero_grad();
    Rng rng(noise_seed);
    const Tensor out = gen.forward(hr, rng);
    Tensor gy(out.shape());
    for (int64_t i = 0; i < out.numel(); ++i)
      gy[i] = 2.0 * (out[i] - target[i]) / double(out.numel());
    gen.backward(gy);

    const auto res = sdsr::testsupport::check_gradients(params, loss, 10);
    CHECK(res.checked > 0);
    CHECK(res.max_rel_err < 1e-3);
  }
}

TEST_CASE("input-dependent sigma mode stays shape-correct and differentiable") {
  GeneratorDesc d = desc_of("residual-chain", 22, 6);
  d.sigma_mode = nn::SigmaMode::kInputDependent;
  d.clamp_output = false;
  DegradationGenerator gen(d);
  const ImageBatch hr = make_texture(16, 3, 7, 0);
  const ImageBatch a = degrade(gen, hr, 1);
  CHECK(a.shape() == Shape{1, 3, 4, 4});
  CHECK(l1_mean(a, degrade(gen, hr, 2)) > 1e-10);  // stochastic by default

  auto loss = [&]() {
    Rng rng(17);
    const Tensor out = gen.forward(hr, rng);
    return mse(out, Tensor(1, 3, 4, 4, 0.3));
  };
  auto params = gen.params();
  for (auto* p : params) p->zero_grad();
  Rng rng(17);
  const Tensor out = gen.forward(hr, rng);
  Tensor gy(out.shape());
  for (int64_t i = 0; i < out.numel(); ++i)
    gy[i] = 2.0 * (out[i] - 0.3) / double(out.numel());
  gen.backward(gy);
  const auto res = sdsr::testsupport::check_gradients(params, loss, 6);
  CHECK(res.max_rel_err < 1e-3);
}
