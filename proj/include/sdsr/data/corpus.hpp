#pragma once

#include <string>
#include <vector>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

struct SplitRatios {
  double train = 0.8, val = 0.1, test = 0.1;
};

struct SplitManifest {
  std::vector<std::string> train, val, test;  // image stems, e.g. "img_0007"
};

// Deterministic split: stems sorted, shuffled with the seeded rng, then cut
// at rounded cumulative boundaries (10 @ 0.8/0.1/0.1 -> 8/1/1).
SplitManifest split_stems(std::vector<std::string> stems, const SplitRatios& ratios,
                          uint64_t seed);

struct PairedSet {
  std::vector<std::string> names;
  std::vector<ImageBatch> lr, hr;
};

// Unpaired training corpus plus paired held-out sets. hr_items come from the
// even positions of the shuffled train split and lr_items from the odd
// positions, so the two sides never share a source image.
struct UnpairedCorpus {
  std::vector<std::string> hr_names;
  std::vector<ImageBatch> hr_items;
  std::vector<std::string> lr_names;
  std::vector<ImageBatch> lr_items;
  PairedSet val, test;
  int patch_hr = 64;
  int scale = 4;
  SplitManifest manifest;
};

// Expects <root>/hr/*.png and <root>/lr/*.png with matching stems. Empty
// directory is a configuration error; undecodable files are reported in one
// itemized error.
UnpairedCorpus load_corpus(const std::string& root, const SplitRatios& ratios, uint64_t seed,
                           int patch_hr, int scale);

ImageBatch sample_hr_patch(const UnpairedCorpus& corpus, uint64_t rng_seed, int batch = 1);
ImageBatch sample_lr_patch(const UnpairedCorpus& corpus, uint64_t rng_seed, int batch = 1);

// single random patch from one image, bounds-checked
ImageBatch crop_patch(const ImageBatch& img, int patch, uint64_t rng_seed,
                      const std::string& name);

}  // namespace sdsr
