#include "sdsr/metrics/fidelity.hpp"

#include "sdsr/core/errors.hpp"
#include "sdsr/core/rng.hpp"
#include "sdsr/metrics/noise_stats.hpp"

namespace sdsr {

FidelityReport degrader_fidelity(DegradationGenerator& gen, const OracleDegradation& oracle,
                                 const std::vector<ImageBatch>& hr_set, int n_samples,
                                 uint64_t seed) {
  if (n_samples < 100)
    throw ConfigError("degrader_fidelity: n_samples must be >= 100, got " +
                      std::to_string(n_samples));
  if (hr_set.empty()) throw ConfigError("degrader_fidelity: empty hr set");
  if (gen.scale() != oracle.scale)
    throw ConfigError("degrader_fidelity: generator scale " + std::to_string(gen.scale()) +
                      " differs from oracle scale " + std::to_string(oracle.scale));

  FidelityReport report;
  Rng pick(derive_seed(seed, "fidelity_pick"));
  double l1_acc = 0.0;

  for (int s = 0; s < n_samples; ++s) {
    const ImageBatch& hr = hr_set[size_t(pick.uniform_int(int64_t(hr_set.size())))];
    const ImageBatch clean = oracle_clean(hr, oracle);

    const ImageBatch from_gen = degrade(gen, hr, derive_seed(seed, "fidelity_gen", uint64_t(s)));
    const ImageBatch from_oracle =
        oracle_degrade(hr, oracle, derive_seed(seed, "fidelity_oracle", uint64_t(s)));

    auto estimate = [&](const ImageBatch& img) {
      const NoiseStdEstimate est = estimate_noise_std(img);
      if (!est.degenerate) return est.sigma;
      report.used_paired_fallback = true;
      return paired_noise_std(img, clean);
    };
    report.gen_stds.push_back(estimate(from_gen));
    report.oracle_stds.push_back(estimate(from_oracle));
    l1_acc += l1_mean(from_gen, clean);
  }

  report.w1 = wasserstein1(report.gen_stds, report.oracle_stds);
  report.mean_l1_to_clean = l1_acc / double(n_samples);
  return report;
}

}  // namespace sdsr
