#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "sdsr/core/rng.hpp"
#include "sdsr/nn/layer.hpp"

namespace sdsr::testsupport {

struct GradCheckResult {
  double max_rel_err = 0.0;
  int checked = 0;
};

// Central finite differences on a deterministic scalar loss vs analytic
// gradients already accumulated in param->grad. Checks up to
// max_coords_per_param coordinates per tensor (seeded pick).
inline GradCheckResult check_gradients(const std::vector<nn::Param*>& params,
                                       const std::function<double()>& loss,
                                       int max_coords_per_param = 24, uint64_t pick_seed = 7,
                                       double h_base = 1e-6) {
  GradCheckResult res;
  Rng pick(pick_seed);
  for (nn::Param* p : params) {
    const int64_t n = p->value.numel();
    std::vector<int64_t> coords;
    if (n <= max_coords_per_param) {
      for (int64_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      for (int i = 0; i < max_coords_per_param; ++i) coords.push_back(pick.uniform_int(n));
    }
    for (int64_t c : coords) {
      const double w0 = p->value[c];
      const double h = h_base * std::max(1.0, std::abs(w0));
      p->value[c] = w0 + h;
      const double lp = loss();
      p->value[c] = w0 - h;
      const double lm = loss();
      p->value[c] = w0;
      const double fd = (lp - lm) / (2.0 * h);
      const double an = p->grad[c];
      ++res.checked;
      const double mag = std::max(std::abs(fd), std::abs(an));
      if (mag < 1e-10) continue;  // both effectively zero
      res.max_rel_err = std::max(res.max_rel_err, std::abs(fd - an) / mag);
    }
  }
  return res;
}

}  // namespace sdsr::testsupport
