#include "sdsr/metrics/report.hpp"

#include <fstream>

#include <json.hpp>

#include "sdsr/core/errors.hpp"
#include "sdsr/metrics/quality.hpp"

namespace sdsr {

namespace {

ImageBatch crop_border(const ImageBatch& t, int crop) {
  if (crop <= 0) return t;
  if (2 * crop >= t.h() || 2 * crop >= t.w())
    throw SizingError("border crop " + std::to_string(crop) + " too large for " +
                      t.shape().str());
  Tensor out(t.n(), t.c(), t.h() - 2 * crop, t.w() - 2 * crop);
  for (int n = 0; n < t.n(); ++n)
    for (int c = 0; c < t.c(); ++c) {
      const double* src = t.plane(n, c);
      double* dst = out.plane(n, c);
      for (int y = 0; y < out.h(); ++y)
        for (int x = 0; x < out.w(); ++x) dst[y * out.w() + x] = src[(y + crop) * t.w() + x + crop];
    }
  return out;
}

}  // namespace

void MetricReport::finalize() {
  double psnr_acc = 0.0, ssim_acc = 0.0;
  int64_t finite = 0;
  any_psnr_infinite = false;
  for (const Row& r : per_image) {
    if (r.psnr_infinite) {
      any_psnr_infinite = true;
    } else {
      psnr_acc += r.psnr_db;
      ++finite;
    }
    ssim_acc += r.ssim;
  }
  mean_psnr_db = finite > 0 ? psnr_acc / double(finite) : 0.0;
  mean_ssim = per_image.empty() ? 0.0 : ssim_acc / double(per_image.size());
}

MetricReport evaluate_pairs(const std::string& model_id, const std::vector<std::string>& names,
                            const std::vector<ImageBatch>& outputs,
                            const std::vector<ImageBatch>& references, int border_crop) {
  if (outputs.size() != references.size() || outputs.size() != names.size())
    throw SizingError("evaluate_pairs: list sizes differ");
  MetricReport rep;
  rep.model_id = model_id;
  for (size_t i = 0; i < outputs.size(); ++i) {
    const ImageBatch a = crop_border(outputs[i], border_crop);
    const ImageBatch b = crop_border(references[i], border_crop);
    MetricReport::Row row;
    row.id = names[i];
    const PsnrResult p = psnr(a, b);
    row.psnr_db = p.infinite ? 0.0 : p.db;
    row.psnr_infinite = p.infinite;
    row.ssim = ssim(a, b);
    rep.per_image.push_back(std::move(row));
  }
  rep.finalize();
  return rep;
}

std::string report_to_json(const std::vector<MetricReport>& reports,
                           const std::string& best_model_id) {
  nlohmann::json j;
  j["best_model"] = best_model_id;
  nlohmann::json models = nlohmann::json::array();
  for (const auto& rep : reports) {
    nlohmann::json m;
    m["model_id"] = rep.model_id;
    m["mean_psnr_db"] = rep.mean_psnr_db;
    m["any_psnr_infinite"] = rep.any_psnr_infinite;
    m["mean_ssim"] = rep.mean_ssim;
    m["config_hash"] = rep.config_hash;
    m["seed"] = rep.seed;
    m["dataset_id"] = rep.dataset_id;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : rep.per_image) {
      nlohmann::json row;
      row["id"] = r.id;
      if (r.psnr_infinite) {
        row["psnr_db"] = nullptr;
        row["psnr_infinite"] = true;
      } else {
        row["psnr_db"] = r.psnr_db;
        row["psnr_infinite"] = false;
      }
      row["ssim"] = r.ssim;
      rows.push_back(row);
    }
    m["per_image"] = rows;
    models.push_back(m);
  }
  j["models"] = models;
  return j.dump(2);
}

void write_report_csv(const std::string& path, const std::vector<MetricReport>& reports) {
  std::ofstream os(path);
  if (!os) throw Error(ExitCode::kFailure, "cannot write report: " + path);
  os << "model_id,image_id,psnr_db,psnr_infinite,ssim\n";
  os.precision(17);
  for (const auto& rep : reports)
    for (const auto& r : rep.per_image)
      os << rep.model_id << "," << r.id << "," << (r.psnr_infinite ? "" : std::to_string(r.psnr_db))
         << "," << (r.psnr_infinite ? 1 : 0) << "," << r.ssim << "\n";
}

}  // namespace sdsr
