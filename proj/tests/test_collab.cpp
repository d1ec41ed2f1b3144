#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sdsr/core/errors.hpp"
#include "sdsr/data/textures.hpp"
#include "sdsr/nn/adam.hpp"
#include "sdsr/sr/collab.hpp"
#include "support/corpus_fixture.hpp"
#include "support/gradcheck.hpp"

using namespace sdsr;
using sdsr::testsupport::make_memory_corpus;

namespace {

std::unique_ptr<SRModel> make_model(int scale, uint64_t seed, int width = 6, int blocks = 1) {
  SRModelDesc d;
  d.model_id = "m" + std::to_string(seed);
  d.scale = scale;
  d.width = width;
  d.blocks = blocks;
  d.init_seed = seed;
  return std::make_unique<SRModel>(d);
}

void set_head_bias(SRModel& m, double v) {
  for (auto* p : m.params())
    if (p->name.find(".head.b") != std::string::npos) p->value.fill(v);
}

double brute_l1(const Tensor& a, const Tensor& b) {
  double acc = 0.0;
  for (int64_t i = 0; i < a.numel(); ++i) acc += std::abs(a[i] - b[i]);
  return acc / double(a.numel());
}

}  // namespace

TEST_CASE("ramp schedule") {
  CHECK(ramp(0, 1000) == 0.0);
  CHECK(ramp(1000, 1000) == 1.0);
  CHECK(ramp(250, 1000) == 0.25);
  bool clamped = false;
  CHECK(ramp(1500, 1000, &clamped) == 1.0);
  CHECK(clamped);
  CHECK_THROWS_AS(ramp(5, 0), ConfigError);

  // nondecreasing in p
  double prev = -1.0;
  for (int64_t p = 0; p <= 200; ++p) {
    const double r = ramp(p, 200);
    CHECK(r >= prev);
    prev = r;
  }
}

TEST_CASE("sup_loss") {
  Tensor a(1, 1, 4, 4, 0.2), b(1, 1, 4, 4, 0.5);
  CHECK(sup_loss(a, a) == 0.0);
  CHECK(sup_loss(a, b) == doctest::Approx(0.3).epsilon(1e-12));

  Rng rng(3);
  Tensor x(1, 3, 4, 4), y(1, 3, 4, 4);
  fill_gaussian(x, rng);
  fill_gaussian(y, rng);
  CHECK(sup_loss(x, y) == doctest::Approx(brute_l1(x, y)).epsilon(1e-12));
  CHECK_THROWS_AS(sup_loss(x, Tensor(1, 3, 4, 5)), SizingError);
}

TEST_CASE("collab_loss") {
  Rng rng(4);
  auto rand_t = [&]() {
    Tensor t(1, 3, 4, 4);
    fill_gaussian(t, rng);
    return t;
  };

  SUBCASE("identical outputs give zero") {
    const Tensor shared = rand_t();
    std::vector<std::vector<Tensor>> outs(2, std::vector<Tensor>(2));
    outs[0][1] = shared;
    outs[1][1] = shared;
    outs[0][0] = rand_t();
    outs[1][0] = rand_t();
    CHECK(collab_loss(outs, 0) == 0.0);
  }
  SUBCASE("constant offset 0.1") {
    std::vector<std::vector<Tensor>> outs(2, std::vector<Tensor>(2));
    outs[0][1] = Tensor(1, 3, 4, 4, 0.6);
    outs[1][1] = Tensor(1, 3, 4, 4, 0.5);
    outs[0][0] = Tensor(1, 3, 4, 4, 0.0);
    outs[1][0] = Tensor(1, 3, 4, 4, 0.0);
    CHECK(collab_loss(outs, 0) == doctest::Approx(0.1).epsilon(1e-12));
  }
  SUBCASE("k=3 equals the brute-force pairwise sum") {
    std::vector<std::vector<Tensor>> outs(3, std::vector<Tensor>(3));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) outs[size_t(i)][size_t(j)] = rand_t();
    const double expected =
        brute_l1(outs[1][0], outs[0][0]) + brute_l1(outs[1][2], outs[2][2]);
    CHECK(collab_loss(outs, 1) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("k=1 empty sum") {
    std::vector<std::vector<Tensor>> outs(1, std::vector<Tensor>(1));
    outs[0][0] = rand_t();
    CHECK(collab_loss(outs, 0) == 0.0);
  }
}

TEST_CASE("pseudo_label") {
  SUBCASE("identical teachers reproduce their output") {
    const Tensor a(1, 3, 8, 8, 0.37);
    const PseudoLabel label = pseudo_label_from_outputs({a, a});
    CHECK(label.teacher_count == 2);
    CHECK(label.gradient_barrier);
    CHECK(bit_equal(label.y_hat, a));
  }
  SUBCASE("constants 0 and 1 average to one half") {
    const PseudoLabel label =
        pseudo_label_from_outputs({Tensor(1, 3, 4, 4, 0.0), Tensor(1, 3, 4, 4, 1.0)});
    for (int64_t i = 0; i < label.y_hat.numel(); ++i) CHECK(label.y_hat[i] == 0.5);
  }
  SUBCASE("k=3 matches the brute-force mean within 1e-7") {
    Rng rng(6);
    std::vector<Tensor> outs;
    for (int l = 0; l < 3; ++l) {
      Tensor t(1, 3, 4, 4);
      fill_gaussian(t, rng);
      outs.push_back(t);
    }
    const PseudoLabel label = pseudo_label_from_outputs(outs);
    for (int64_t i = 0; i < label.y_hat.numel(); ++i) {
      const double expected = (outs[0][i] + outs[1][i] + outs[2][i]) / 3.0;
      CHECK(std::abs(label.y_hat[i] - expected) < 1e-7);
    }
  }
  SUBCASE("live model path agrees with averaging the forwards") {
    auto m0 = make_model(2, 1), m1 = make_model(2, 2);
    std::vector<SRModel*> models = {m0.get(), m1.get()};
    const ImageBatch x = make_texture(8, 3, 7, 0);
    const PseudoLabel label = pseudo_label(models, x);
    const Tensor o0 = m0->forward(x), o1 = m1->forward(x);
    for (int64_t i = 0; i < label.y_hat.numel(); ++i)
      CHECK(std::abs(label.y_hat[i] - 0.5 * (o0[i] + o1[i])) < 1e-12);
  }
  SUBCASE("empty list rejected") {
    CHECK_THROWS_AS(pseudo_label_from_outputs({}), ConfigError);
  }
}

TEST_CASE("total_loss") {
  // identity models at scale 1, head bias on model 0 only
  auto m0 = make_model(1, 11);
  auto m1 = make_model(1, 12);
  set_head_bias(*m0, 0.05);
  std::vector<SRModel*> models = {m0.get(), m1.get()};

  CollabConfig cfg;
  cfg.lambda_sup = 1.0;
  cfg.lambda_col = 0.01;
  cfg.lambda_ada = 10.0;
  cfg.ramp_max = 1000;

  SynthBatch synth;
  synth.y = Tensor(1, 3, 8, 8, 0.0);
  synth.x = {Tensor(1, 3, 8, 8, 0.15), Tensor(1, 3, 8, 8, 0.55)};

  RealBatch real;
  real.x = Tensor(1, 3, 8, 8, 0.3);
  real.label.y_hat = Tensor(1, 3, 8, 8, 0.25);
  real.label.teacher_count = 2;

  SUBCASE("archival arithmetic: 0.2 + 0.0005 + 0.5 = 0.7005") {
    const TotalLossBreakdown out = total_loss(models, 0, synth, &real, 500, cfg);
    CHECK(out.sup == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(out.col == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(out.ada == doctest::Approx(0.1).epsilon(1e-12));
    // total reproduces the weighted sum exactly (same expression shape)
    const double r = ramp(500, cfg.ramp_max);
    CHECK(out.total ==
          cfg.lambda_sup * out.sup + cfg.lambda_col * out.col + cfg.lambda_ada * r * out.ada);
    CHECK(out.total == doctest::Approx(0.7005).epsilon(1e-12));
  }
  SUBCASE("lambda_col = lambda_ada = 0 reduces to plain supervised L1") {
    CollabConfig naive = cfg;
    naive.lambda_col = 0.0;
    naive.lambda_ada = 0.0;
    const TotalLossBreakdown out = total_loss(models, 0, synth, nullptr, 500, naive);
    CHECK(out.total == doctest::Approx(out.sup).epsilon(1e-12));
    CHECK(out.total == doctest::Approx(0.2).epsilon(1e-12));
  }
  SUBCASE("p = 0 zeroes the adaptation term regardless of lambda_ada") {
    const TotalLossBreakdown out = total_loss(models, 0, synth, &real, 0, cfg);
    CHECK(out.ada == 0.0);
    CHECK(out.total == doctest::Approx(cfg.lambda_sup * out.sup + cfg.lambda_col * out.col)
                           .epsilon(1e-12));
  }
  SUBCASE("missing real batch while the ramped term is active") {
    CHECK_THROWS_AS(total_loss(models, 0, synth, nullptr, 500, cfg), ConfigError);
  }
}

TEST_CASE("total_loss gradients match finite differences (k=2, 8x8)") {
  // scale-2 models, LR 4x4 -> HR 8x8, all three terms active
  auto m0 = make_model(2, 21);
  auto m1 = make_model(2, 22);
  std::vector<SRModel*> models = {m0.get(), m1.get()};

  CollabConfig cfg;
  cfg.lambda_sup = 1.0;
  cfg.lambda_col = 0.01;
  cfg.lambda_ada = 10.0;
  cfg.ramp_max = 1000;
  const int64_t p = 500;

  Rng rng(31);
  SynthBatch synth;
  synth.y = make_texture(8, 3, 32, 0);
  Tensor x0(1, 3, 4, 4), x1(1, 3, 4, 4);
  for (int64_t i = 0; i < x0.numel(); ++i) x0[i] = rng.uniform(0.2, 0.8);
  for (int64_t i = 0; i < x1.numel(); ++i) x1[i] = rng.uniform(0.2, 0.8);
  synth.x = {x0, x1};

  RealBatch real;
  real.x = Tensor(1, 3, 4, 4);
  for (int64_t i = 0; i < real.x.numel(); ++i) real.x[i] = rng.uniform(0.2, 0.8);
  real.label = pseudo_label(models, real.x);  // fixed: the gradient barrier

  for (int i = 0; i < 2; ++i) {
    CAPTURE(i);
    for (auto* m : models)
      for (auto* prm : m->params()) prm->zero_grad();
    const TotalLossBreakdown out = accumulate_total_loss_grads(models, i, synth, &real, p, cfg);
    CHECK(out.total > 0.0);

    auto loss = [&]() { return total_loss(models, i, synth, &real, p, cfg).total; };
    const auto res = sdsr::testsupport::check_gradients(models[size_t(i)]->params(), loss, 8);
    CHECK(res.checked > 0);
    CHECK(res.max_rel_err < 1e-3);

    // no teacher gradients: the peer's accumulators stay exactly zero
    for (auto* prm : models[size_t(1 - i)]->params())
      for (int64_t j = 0; j < prm->grad.numel(); ++j) CHECK(prm->grad[j] == 0.0);
  }

  // perturbing the peer changes the value (so the zero gradient above is a
  // barrier, not an insensitivity)
  const double before = total_loss(models, 0, synth, &real, p, cfg).total;
  for (auto* prm : m1->params())
    if (prm->name.find(".head.b") != std::string::npos) prm->value.fill(0.02);
  const double after = total_loss(models, 0, synth, &real, p, cfg).total;
  CHECK(std::abs(after - before) > 1e-9);
}

TEST_CASE("train_collab") {
  OracleDegradation oracle;
  oracle.scale = 4;
  const UnpairedCorpus corpus = make_memory_corpus(4, 4, 48, oracle, 41, 16);

  auto make_ens = [](int k) {
    std::vector<GeneratorDesc> specs;
    const std::vector<std::string> fams = {"residual-chain", "attention-strided"};
    for (int i = 0; i < k; ++i) {
      GeneratorDesc d;
      d.family = fams[size_t(i) % fams.size()];
      d.scale = 4;
      d.width = 6;
      d.init_seed = uint64_t(50 + i);
      d.arch_id = d.family + "-tc" + std::to_string(i);
      specs.push_back(d);
    }
    return build_ensemble(specs);
  };

  CollabConfig cfg;
  cfg.k = 2;
  cfg.steps = 8;
  cfg.ramp_max = 8;
  cfg.batch = 2;
  cfg.eval_every = 4;
  cfg.seed = 99;

  SUBCASE("steps=0 leaves models untouched") {
    auto m0 = make_model(4, 61), m1 = make_model(4, 62);
    std::vector<SRModel*> models = {m0.get(), m1.get()};
    auto p0 = m0->params();
    const uint64_t before = nn::param_checksum(p0);
    GeneratorEnsemble ens = make_ens(2);
    CollabConfig c = cfg;
    c.steps = 0;
    const CollabTrainResult r = train_collab(models, ens, corpus, c);
    CHECK(r.curves.empty());
    CHECK(nn::param_checksum(p0) == before);
  }

  SUBCASE("same seed reruns produce identical curves and parameters") {
    GeneratorEnsemble ens = make_ens(2);
    uint64_t sums[2];
    std::vector<CollabCurveRow> curves[2];
    for (int run = 0; run < 2; ++run) {
      auto m0 = make_model(4, 61), m1 = make_model(4, 62);
      std::vector<SRModel*> models = {m0.get(), m1.get()};
      const CollabTrainResult r = train_collab(models, ens, corpus, cfg);
      auto params = m0->params();
      sums[run] = nn::param_checksum(params);
      curves[run] = r.curves;
    }
    CHECK(sums[0] == sums[1]);
    REQUIRE(curves[0].size() == curves[1].size());
    for (size_t i = 0; i < curves[0].size(); ++i) {
      CHECK(curves[0][i].psnr == curves[1][i].psnr);
      CHECK(curves[0][i].sup == curves[1][i].sup);
      CHECK(curves[0][i].ada == curves[1][i].ada);
    }
  }

  SUBCASE("generators stay frozen") {
    GeneratorEnsemble ens = make_ens(2);
    std::vector<uint64_t> before;
    for (auto& g : ens.members) {
      auto prm = g->params();
      before.push_back(nn::param_checksum(prm));
    }
    auto m0 = make_model(4, 61), m1 = make_model(4, 62);
    std::vector<SRModel*> models = {m0.get(), m1.get()};
    train_collab(models, ens, corpus, cfg);
    for (size_t g = 0; g < ens.members.size(); ++g) {
      auto prm = ens.members[g]->params();
      CHECK(nn::param_checksum(prm) == before[g]);
    }
  }

  SUBCASE("k=1 with zeroed extras reproduces plain supervised training bit-for-bit") {
    GeneratorEnsemble ens = make_ens(1);
    CollabConfig c = cfg;
    c.k = 1;
    c.lambda_col = 0.0;
    c.lambda_ada = 0.0;
    c.alternation = {Phase::kSynthetic};
    c.steps = 12;

    auto trained = make_model(4, 71);
    {
      std::vector<SRModel*> models = {trained.get()};
      train_collab(models, ens, corpus, c);
    }

    // reference loop against the documented per-iteration seed contract
    auto ref = make_model(4, 71);
    nn::Adam opt(ref->params(), c.lr);
    for (int64_t p = 0; p < c.steps; ++p) {
      const ImageBatch y =
          sample_hr_patch(corpus, derive_seed(c.seed, "collab_hr", uint64_t(p)), c.batch);
      const ImageBatch x =
          degrade(ens.member(0), y, derive_seed(c.seed, "collab_x", uint64_t(p * 1 + 0)));
      const Tensor pred = ref->forward(x);
      Tensor g(pred.shape());
      for (int64_t i = 0; i < pred.numel(); ++i) {
        const double d = pred[i] - y[i];
        g[i] = (d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0)) * c.lambda_sup / double(pred.numel());
      }
      ref->backward(g);
      opt.step();
      opt.zero_grad();
    }
    auto pa = trained->params();
    auto pb = ref->params();
    CHECK(nn::param_checksum(pa) == nn::param_checksum(pb));
  }

  SUBCASE("pooled and clean-bicubic data modes run") {
    for (CollabDataMode mode : {CollabDataMode::kPooled, CollabDataMode::kCleanBicubic}) {
      GeneratorEnsemble ens = make_ens(2);
      CollabConfig c = cfg;
      c.k = 1;
      c.lambda_col = 0.0;
      c.lambda_ada = 0.0;
      c.alternation = {Phase::kSynthetic};
      c.data_mode = mode;
      c.steps = 4;
      auto m = make_model(4, 81);
      std::vector<SRModel*> models = {m.get()};
      const CollabTrainResult r = train_collab(models, ens, corpus, c);
      CHECK(r.steps_done == 4);
      CHECK(!r.aborted);
    }
  }

  SUBCASE("real phase requires real LR items when lambda_ada > 0") {
    GeneratorEnsemble ens = make_ens(2);
    UnpairedCorpus no_real = corpus;
    no_real.lr_items.clear();
    no_real.lr_names.clear();
    auto m0 = make_model(4, 61), m1 = make_model(4, 62);
    std::vector<SRModel*> models = {m0.get(), m1.get()};
    CHECK_THROWS_AS(train_collab(models, ens, no_real, cfg), ConfigError);
  }

  SUBCASE("curves carry per-model psnr on the held-out set") {
    GeneratorEnsemble ens = make_ens(2);
    auto m0 = make_model(4, 61), m1 = make_model(4, 62);
    std::vector<SRModel*> models = {m0.get(), m1.get()};
    const CollabTrainResult r = train_collab(models, ens, corpus, cfg);
    REQUIRE(!r.curves.empty());
    CHECK(r.curves.back().iteration == cfg.steps);
    for (const auto& row : r.curves) {
      REQUIRE(row.psnr.size() == 2);
      for (double v : row.psnr) CHECK(v > 5.0);  // bicubic-skip starts near sane psnr
    }
  }
}
