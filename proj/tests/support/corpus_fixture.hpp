#pragma once

#include <filesystem>
#include <string>

#include "sdsr/core/image_io.hpp"
#include "sdsr/core/rng.hpp"
#include "sdsr/data/corpus.hpp"
#include "sdsr/data/oracle.hpp"
#include "sdsr/data/textures.hpp"

namespace sdsr::testsupport {

// Writes a small oracle corpus (hr/ + lr/ PNGs) under a fresh temp directory.
struct CorpusDir {
  std::filesystem::path root;

  CorpusDir(int n_images, int size, const OracleDegradation& oracle, uint64_t seed,
            const std::string& tag) {
    namespace fs = std::filesystem;
    root = fs::temp_directory_path() / ("sdsr_corpus_" + tag + "_" + std::to_string(seed));
    fs::remove_all(root);
    fs::create_directories(root / "hr");
    fs::create_directories(root / "lr");
    for (int i = 0; i < n_images; ++i) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "img_%04d", i);
      const ImageBatch hr = make_texture(size, 3, seed, uint64_t(i));
      save_image((root / "hr" / (std::string(stem) + ".png")).string(), hr);
      const ImageBatch hr_q = load_image((root / "hr" / (std::string(stem) + ".png")).string());
      const ImageBatch lr = oracle_degrade(hr_q, oracle, derive_seed(seed, "fixture_lr",
                                                                     uint64_t(i)));
      save_image((root / "lr" / (std::string(stem) + ".png")).string(), lr);
    }
  }

  ~CorpusDir() { std::filesystem::remove_all(root); }
};

// In-memory corpus straight from textures, skipping the PNG round trip.
inline UnpairedCorpus make_memory_corpus(int n_hr, int n_lr, int size,
                                         const OracleDegradation& oracle, uint64_t seed,
                                         int patch_hr, int n_val = 2) {
  UnpairedCorpus c;
  c.patch_hr = patch_hr;
  c.scale = oracle.scale;
  for (int i = 0; i < n_hr; ++i) {
    c.hr_names.push_back("hr_" + std::to_string(i));
    c.hr_items.push_back(make_texture(size, 3, seed, uint64_t(i)));
  }
  for (int i = 0; i < n_lr; ++i) {
    c.lr_names.push_back("lr_" + std::to_string(i));
    const ImageBatch hr = make_texture(size, 3, seed, uint64_t(1000 + i));
    c.lr_items.push_back(oracle_degrade(hr, oracle, derive_seed(seed, "mem_lr", uint64_t(i))));
  }
  for (int i = 0; i < n_val; ++i) {
    const ImageBatch hr = make_texture(size, 3, seed, uint64_t(2000 + i));
    c.val.names.push_back("val_" + std::to_string(i));
    c.val.hr.push_back(hr);
    c.val.lr.push_back(oracle_degrade(hr, oracle, derive_seed(seed, "mem_val", uint64_t(i))));
  }
  return c;
}

}  // namespace sdsr::testsupport
