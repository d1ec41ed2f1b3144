#pragma once

#include <string>
#include <vector>

#include "sdsr/core/tensor.hpp"

namespace sdsr {

// Per-image and aggregate quality numbers with run metadata. Aggregate PSNR
// averages the finite entries; infinite entries are flagged, never averaged.
struct MetricReport {
  struct Row {
    std::string id;
    double psnr_db = 0.0;
    bool psnr_infinite = false;
    double ssim = 0.0;
  };

  std::string model_id;
  std::vector<Row> per_image;
  double mean_psnr_db = 0.0;
  bool any_psnr_infinite = false;
  double mean_ssim = 0.0;

  std::string config_hash;  // hex
  uint64_t seed = 0;
  std::string dataset_id;

  void finalize();  // recompute aggregates from per_image
};

MetricReport evaluate_pairs(const std::string& model_id,
                            const std::vector<std::string>& names,
                            const std::vector<ImageBatch>& outputs,
                            const std::vector<ImageBatch>& references, int border_crop = 0);

std::string report_to_json(const std::vector<MetricReport>& reports,
                           const std::string& best_model_id);
void write_report_csv(const std::string& path, const std::vector<MetricReport>& reports);

}  // namespace sdsr
