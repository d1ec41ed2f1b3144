#include "sdsr/data/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/image_io.hpp"
#include "sdsr/core/rng.hpp"

namespace fs = std::filesystem;

namespace sdsr {

SplitManifest split_stems(std::vector<std::string> stems, const SplitRatios& ratios,
                          uint64_t seed) {
  const double sum = ratios.train + ratios.val + ratios.test;
  if (std::abs(sum - 1.0) > 1e-9)
    throw ConfigError("split ratios must sum to 1, got " + std::to_string(sum));

  std::sort(stems.begin(), stems.end());
  Rng rng(derive_seed(seed, "split"));
  // Fisher-Yates
  for (size_t i = stems.size(); i > 1; --i)
    std::swap(stems[i - 1], stems[size_t(rng.uniform_int(int64_t(i)))]);

  const auto n = double(stems.size());
  const size_t b1 = size_t(std::llround(ratios.train * n));
  const size_t b2 = size_t(std::llround((ratios.train + ratios.val) * n));

  SplitManifest m;
  m.train.assign(stems.begin(), stems.begin() + std::min(b1, stems.size()));
  m.val.assign(stems.begin() + std::min(b1, stems.size()),
               stems.begin() + std::min(b2, stems.size()));
  m.test.assign(stems.begin() + std::min(b2, stems.size()), stems.end());
  return m;
}

UnpairedCorpus load_corpus(const std::string& root, const SplitRatios& ratios, uint64_t seed,
                           int patch_hr, int scale) {
  const fs::path hr_dir = fs::path(root) / "hr";
  const fs::path lr_dir = fs::path(root) / "lr";
  if (!fs::is_directory(hr_dir) || !fs::is_directory(lr_dir))
    throw MissingInputError("corpus root must contain hr/ and lr/: " + root);
  if (patch_hr % scale != 0)
    throw ConfigError("patch_hr " + std::to_string(patch_hr) + " not divisible by scale " +
                      std::to_string(scale));

  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(hr_dir))
    if (e.path().extension() == ".png") stems.push_back(e.path().stem().string());
  if (stems.empty()) throw ConfigError("no PNG images found under " + hr_dir.string());

  UnpairedCorpus corpus;
  corpus.patch_hr = patch_hr;
  corpus.scale = scale;
  corpus.manifest = split_stems(stems, ratios, seed);

  std::vector<std::string> bad;
  auto load = [&](const fs::path& p) -> ImageBatch {
    try {
      return load_image(p.string());
    } catch (const std::exception&) {
      bad.push_back(p.string());
      return {};
    }
  };

  const auto& train = corpus.manifest.train;
  for (size_t i = 0; i < train.size(); ++i) {
    if (i % 2 == 0) {
      corpus.hr_names.push_back(train[i]);
      corpus.hr_items.push_back(load(hr_dir / (train[i] + ".png")));
    } else {
      corpus.lr_names.push_back(train[i]);
      corpus.lr_items.push_back(load(lr_dir / (train[i] + ".png")));
    }
  }
  for (const auto* split : {&corpus.manifest.val, &corpus.manifest.test}) {
    PairedSet& set = split == &corpus.manifest.val ? corpus.val : corpus.test;
    for (const auto& stem : *split) {
      set.names.push_back(stem);
      set.hr.push_back(load(hr_dir / (stem + ".png")));
      set.lr.push_back(load(lr_dir / (stem + ".png")));
    }
  }

  if (!bad.empty()) {
    std::string msg = "failed to load " + std::to_string(bad.size()) + " image(s):";
    for (const auto& p : bad) msg += "\n  " + p;
    throw Error(ExitCode::kFailure, msg);
  }
  return corpus;
}

ImageBatch crop_patch(const ImageBatch& img, int patch, uint64_t rng_seed,
                      const std::string& name) {
  if (patch > img.h() || patch > img.w())
    throw SizingError("patch " + std::to_string(patch) + " larger than image '" + name + "' " +
                      img.shape().str());
  Rng rng(rng_seed);
  const int oy = int(rng.uniform_int(img.h() - patch + 1));
  const int ox = int(rng.uniform_int(img.w() - patch + 1));
  Tensor out(1, img.c(), patch, patch);
  for (int c = 0; c < img.c(); ++c) {
    const double* src = img.plane(0, c);
    double* dst = out.plane(0, c);
    for (int y = 0; y < patch; ++y)
      for (int x = 0; x < patch; ++x) dst[y * patch + x] = src[(oy + y) * img.w() + ox + x];
  }
  return out;
}

namespace {

ImageBatch sample_patches(const std::vector<ImageBatch>& items,
                          const std::vector<std::string>& names, int patch, uint64_t rng_seed,
                          int batch, const char* side) {
  if (items.empty()) throw ConfigError(std::string("corpus has no ") + side + " items");
  Rng pick(derive_seed(rng_seed, "pick"));
  Tensor out;
  for (int b = 0; b < batch; ++b) {
    const auto i = size_t(pick.uniform_int(int64_t(items.size())));
    ImageBatch p = crop_patch(items[i], patch, derive_seed(rng_seed, "crop", uint64_t(b)),
                              names[i]);
    if (b == 0) out = Tensor(batch, p.c(), p.h(), p.w());
    std::copy(p.data(), p.data() + p.numel(), out.data() + int64_t(b) * p.numel());
  }
  return out;
}

}  // namespace

ImageBatch sample_hr_patch(const UnpairedCorpus& corpus, uint64_t rng_seed, int batch) {
  return sample_patches(corpus.hr_items, corpus.hr_names, corpus.patch_hr, rng_seed, batch,
                        "hr");
}

ImageBatch sample_lr_patch(const UnpairedCorpus& corpus, uint64_t rng_seed, int batch) {
  return sample_patches(corpus.lr_items, corpus.lr_names, corpus.patch_hr / corpus.scale,
                        rng_seed, batch, "lr");
}

}  // namespace sdsr
