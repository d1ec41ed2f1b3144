#include "sdsr/metrics/robustness.hpp"

#include <fstream>

#include <json.hpp>

#include "sdsr/core/errors.hpp"
#include "sdsr/core/rng.hpp"
#include "sdsr/metrics/quality.hpp"

namespace sdsr {

RobustnessCurve robustness_sweep(const RestoreFn& model, const std::vector<ValPair>& val_pairs,
                                 const std::vector<double>& sigma_grid, uint64_t seed) {
  if (sigma_grid.empty()) throw ConfigError("robustness_sweep: empty sigma grid");
  for (size_t i = 0; i < sigma_grid.size(); ++i) {
    if (sigma_grid[i] < 0.0) throw ConfigError("robustness_sweep: sigma must be >= 0");
    if (i > 0 && sigma_grid[i] <= sigma_grid[i - 1])
      throw ConfigError("robustness_sweep: sigma grid must be strictly increasing");
  }
  if (val_pairs.empty()) throw ConfigError("robustness_sweep: no validation pairs");

  RobustnessCurve curve;
  curve.sigma_grid = sigma_grid;
  for (size_t si = 0; si < sigma_grid.size(); ++si) {
    const double sigma = sigma_grid[si] / 255.0;
    double psnr_acc = 0.0, ssim_acc = 0.0;
    for (size_t vi = 0; vi < val_pairs.size(); ++vi) {
      ImageBatch lr = val_pairs[vi].lr;
      if (sigma > 0.0) {
        Rng rng(derive_seed(seed, "robust_noise", uint64_t(si * 100003 + vi)));
        double* p = lr.data();
        for (int64_t i = 0, n = lr.numel(); i < n; ++i) p[i] += sigma * rng.gaussian();
      }
      const ImageBatch out = model(lr);
      psnr_acc += psnr(out, val_pairs[vi].hr).db;
      ssim_acc += ssim(out, val_pairs[vi].hr);
    }
    curve.psnr_at_sigma.push_back(psnr_acc / double(val_pairs.size()));
    curve.ssim_at_sigma.push_back(ssim_acc / double(val_pairs.size()));
  }
  return curve;
}

std::string robustness_to_json(const RobustnessCurve& c) {
  nlohmann::json j;
  j["sigma_grid"] = c.sigma_grid;
  j["psnr_at_sigma"] = c.psnr_at_sigma;
  j["ssim_at_sigma"] = c.ssim_at_sigma;
  return j.dump(2);
}

RobustnessCurve robustness_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  RobustnessCurve c;
  c.sigma_grid = j.at("sigma_grid").get<std::vector<double>>();
  c.psnr_at_sigma = j.at("psnr_at_sigma").get<std::vector<double>>();
  c.ssim_at_sigma = j.at("ssim_at_sigma").get<std::vector<double>>();
  return c;
}

void write_robustness_csv(const std::string& path, const RobustnessCurve& c) {
  std::ofstream os(path);
  if (!os) throw Error(ExitCode::kFailure, "cannot write curve: " + path);
  os << "sigma,psnr,ssim\n";
  os.precision(17);
  for (size_t i = 0; i < c.sigma_grid.size(); ++i)
    os << c.sigma_grid[i] << "," << c.psnr_at_sigma[i] << "," << c.ssim_at_sigma[i] << "\n";
}

}  // namespace sdsr
