#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/resample.hpp"
#include "sdsr/core/rng.hpp"
#include "sdsr/data/corpus.hpp"
#include "sdsr/data/oracle.hpp"
#include "sdsr/data/textures.hpp"
#include "sdsr/metrics/noise_stats.hpp"
#include "support/corpus_fixture.hpp"

using namespace sdsr;
namespace fs = std::filesystem;
using sdsr::testsupport::CorpusDir;

namespace {

std::vector<std::string> fake_stems(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back("img_" + std::to_string(1000 + i));
  return out;
}

}  // namespace

TEST_CASE("split arithmetic") {
  SUBCASE("10 images at 0.8/0.1/0.1 gives 8/1/1") {
    const SplitManifest m = split_stems(fake_stems(10), {0.8, 0.1, 0.1}, 3);
    CHECK(m.train.size() == 8);
    CHECK(m.val.size() == 1);
    CHECK(m.test.size() == 1);
  }
  SUBCASE("100 images at 0.7/0.2/0.1 gives 70/20/10, every image exactly once") {
    const auto stems = fake_stems(100);
    const SplitManifest m = split_stems(stems, {0.7, 0.2, 0.1}, 3);
    CHECK(m.train.size() == 70);
    CHECK(m.val.size() == 20);
    CHECK(m.test.size() == 10);
    // brute-force assignment count
    std::map<std::string, int> seen;
    for (const auto& s : m.train) ++seen[s];
    for (const auto& s : m.val) ++seen[s];
    for (const auto& s : m.test) ++seen[s];
    CHECK(seen.size() == 100);
    for (const auto& [stem, count] : seen) {
      CAPTURE(stem);
      CHECK(count == 1);
    }
  }
  SUBCASE("50 images at 0.8/0.1/0.1 gives 40/5/5") {
    const SplitManifest m = split_stems(fake_stems(50), {0.8, 0.1, 0.1}, 3);
    CHECK(m.train.size() == 40);
    CHECK(m.val.size() == 5);
    CHECK(m.test.size() == 5);
  }
  SUBCASE("same seed, same ordering; ratios must sum to 1") {
    const SplitManifest a = split_stems(fake_stems(20), {0.8, 0.1, 0.1}, 5);
    const SplitManifest b = split_stems(fake_stems(20), {0.8, 0.1, 0.1}, 5);
    CHECK(a.train == b.train);
    CHECK(a.val == b.val);
    CHECK(a.test == b.test);
    CHECK_THROWS_AS(split_stems(fake_stems(4), {0.5, 0.1, 0.1}, 5), ConfigError);
  }
}

TEST_CASE("load_corpus") {
  OracleDegradation oracle;
  oracle.scale = 4;
  CorpusDir dir(10, 64, oracle, 21, "load");

  SUBCASE("hr and lr training items never share a source image") {
    const UnpairedCorpus c = load_corpus(dir.root.string(), {0.8, 0.1, 0.1}, 21, 32, 4);
    CHECK(c.hr_items.size() + c.lr_items.size() == 8);
    CHECK(c.val.hr.size() == 1);
    std::set<std::string> hr_set(c.hr_names.begin(), c.hr_names.end());
    for (const auto& n : c.lr_names) CHECK(hr_set.count(n) == 0);
  }
  SUBCASE("two loads are identical") {
    const UnpairedCorpus a = load_corpus(dir.root.string(), {0.8, 0.1, 0.1}, 21, 32, 4);
    const UnpairedCorpus b = load_corpus(dir.root.string(), {0.8, 0.1, 0.1}, 21, 32, 4);
    CHECK(a.hr_names == b.hr_names);
    CHECK(a.lr_names == b.lr_names);
    REQUIRE(a.hr_items.size() == b.hr_items.size());
    for (size_t i = 0; i < a.hr_items.size(); ++i)
      CHECK(bit_equal(a.hr_items[i], b.hr_items[i]));
  }
  SUBCASE("empty directory is a configuration error") {
    const auto empty = fs::temp_directory_path() / "sdsr_empty_corpus";
    fs::create_directories(empty / "hr");
    fs::create_directories(empty / "lr");
    CHECK_THROWS_AS(load_corpus(empty.string(), {0.8, 0.1, 0.1}, 1, 32, 4), ConfigError);
    fs::remove_all(empty);
  }
  SUBCASE("undecodable files are itemized") {
    const auto bad_hr = dir.root / "hr" / "img_0099.png";
    const auto bad_lr = dir.root / "lr" / "img_0099.png";
    std::ofstream(bad_hr) << "not a png";
    std::ofstream(bad_lr) << "not a png";
    CHECK_THROWS_WITH_AS(load_corpus(dir.root.string(), {0.8, 0.1, 0.1}, 21, 32, 4),
                         doctest::Contains("img_0099"), Error);
    fs::remove(bad_hr);
    fs::remove(bad_lr);
  }
}

TEST_CASE("patch sampling") {
  OracleDegradation oracle;
  const UnpairedCorpus c = sdsr::testsupport::make_memory_corpus(2, 2, 96, oracle, 31, 64);

  SUBCASE("shape contract") {
    const ImageBatch p = sample_hr_patch(c, 7);
    CHECK(p.shape() == Shape{1, 3, 64, 64});
    CHECK(p.min() >= 0.0);
    CHECK(p.max() <= 1.0);
  }
  SUBCASE("fixed seed reproduces the patch") {
    CHECK(bit_equal(sample_hr_patch(c, 123), sample_hr_patch(c, 123)));
    CHECK(!bit_equal(sample_hr_patch(c, 123), sample_hr_patch(c, 124)));
  }
  SUBCASE("both images get sampled, frequency near uniform") {
    // two constant images so the patch mean identifies its source;
    // 1000 draws: each image within 10% of uniform
    UnpairedCorpus flat;
    flat.patch_hr = 16;
    flat.scale = 4;
    flat.hr_names = {"dark", "bright"};
    flat.hr_items.push_back(Tensor(1, 3, 32, 32, 0.25));
    flat.hr_items.push_back(Tensor(1, 3, 32, 32, 0.75));
    int count0 = 0;
    for (int d = 0; d < 1000; ++d) {
      const ImageBatch p = sample_hr_patch(flat, derive_seed(99, "freq", uint64_t(d)));
      if (p.mean() < 0.5) ++count0;
    }
    CHECK(count0 > 400);
    CHECK(count0 < 600);
  }
  SUBCASE("patch larger than image names the offender") {
    UnpairedCorpus small = c;
    small.patch_hr = 128;
    CHECK_THROWS_WITH_AS(sample_hr_patch(small, 7), doctest::Contains("hr_"), SizingError);
  }
  SUBCASE("bounds property over random sizes") {
    Rng rng(55);
    for (int trial = 0; trial < 100; ++trial) {
      const int sz = 8 + int(rng.uniform_int(40));
      const int patch = 1 + int(rng.uniform_int(sz));
      const ImageBatch img = make_texture(sz, 3, 7, uint64_t(trial));
      const ImageBatch p = crop_patch(img, patch, rng.next_u64(), "t");
      CHECK(p.h() == patch);
      CHECK(p.all_finite());
      CHECK(p.min() >= 0.0);
      CHECK(p.max() <= 1.0);
    }
  }
}

TEST_CASE("oracle degradation") {
  OracleDegradation oracle;
  oracle.scale = 4;

  SUBCASE("shape contract 64 -> 16") {
    const ImageBatch hr = make_texture(64, 3, 61, 0);
    const ImageBatch lr = oracle_degrade(hr, oracle, 5);
    CHECK(lr.shape() == Shape{1, 3, 16, 16});
  }
  SUBCASE("zero noise equals the pure downsample") {
    OracleDegradation quiet = oracle;
    quiet.sigma_lo = quiet.sigma_hi = 0.0;
    const ImageBatch hr = make_texture(64, 3, 62, 0);
    const ImageBatch lr = oracle_degrade(hr, quiet, 5);
    CHECK(bit_equal(lr, clamp01(bicubic_downsample(hr, 4))));
  }
  SUBCASE("bit reproducible") {
    const ImageBatch hr = make_texture(64, 3, 63, 0);
    CHECK(bit_equal(oracle_degrade(hr, oracle, 5), oracle_degrade(hr, oracle, 5)));
    CHECK(!bit_equal(oracle_degrade(hr, oracle, 5), oracle_degrade(hr, oracle, 6)));
  }
  SUBCASE("noise std calibration on a constant image") {
    // sigma range [20,20], constant 0.5: sample std over 1e5 pixels within 3%
    OracleDegradation fixed = oracle;
    fixed.sigma_lo = fixed.sigma_hi = 20.0;
    Tensor hr(1, 1, 1280, 1280, 0.5);
    const ImageBatch lr = oracle_degrade(hr, fixed, 9);
    const Tensor clean = bicubic_downsample(hr, 4);
    const double sd = paired_noise_std(lr, clean);
    CHECK(sd == doctest::Approx(20.0 / 255.0).epsilon(0.03));
  }
  SUBCASE("per-image sigma stays in range") {
    OracleDegradation o = oracle;
    o.sigma_lo = 5.0;
    o.sigma_hi = 25.0;
    Tensor hr(1, 3, 256, 256, 0.5);
    const Tensor clean = bicubic_downsample(hr, 4);
    for (int i = 0; i < 20; ++i) {
      const ImageBatch lr = oracle_degrade(hr, o, uint64_t(100 + i));
      const double sd = paired_noise_std(lr, clean) * 255.0;
      // estimator error < 5% at 64x64x3 pixels
      CHECK(sd > 5.0 * 0.95);
      CHECK(sd < 25.0 * 1.05);
    }
  }
  SUBCASE("non-divisible dims rejected") {
    Tensor hr(1, 3, 30, 32, 0.5);
    CHECK_THROWS_AS(oracle_degrade(hr, oracle, 1), SizingError);
  }
}

TEST_CASE("flat-region noise estimator") {
  SUBCASE("accurate on flat content at 1e4 pixels") {
    Rng rng(71);
    const double sigma = 15.0 / 255.0;
    Tensor img(1, 1, 128, 128, 0.5);
    for (int64_t i = 0; i < img.numel(); ++i) img[i] += sigma * rng.gaussian();
    const NoiseStdEstimate est = estimate_noise_std(img);
    CHECK(!est.degenerate);
    CHECK(est.sigma == doctest::Approx(sigma).epsilon(0.05));
  }
  SUBCASE("textured but locally flat images stay usable") {
    const ImageBatch hr = make_texture(96, 3, 72, 1);
    OracleDegradation o;
    o.sigma_lo = o.sigma_hi = 18.0;
    const ImageBatch lr = oracle_degrade(hr, o, 3);
    const NoiseStdEstimate est = estimate_noise_std(lr);
    CHECK(!est.degenerate);
    CHECK(est.sigma == doctest::Approx(18.0 / 255.0).epsilon(0.25));
  }
  SUBCASE("steep ramp image is degenerate") {
    Tensor img(1, 1, 32, 32);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) img.at(0, 0, y, x) = (x + y) / 16.0 - 1.0;
    const NoiseStdEstimate est = estimate_noise_std(img);
    CHECK(est.degenerate);
  }
}
