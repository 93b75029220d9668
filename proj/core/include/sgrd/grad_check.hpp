#pragma once

#include <string>
#include <vector>

#include "sgrd/net.hpp"

namespace sgrd {

struct GradCheckEntry {
  std::string param;
  double max_rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> per_param;
  std::string worst_param;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  std::string summary() const;
};

// Compares the analytic parameter gradients of sum(c .* net(input)) against
// central finite differences evaluated in 64-bit arithmetic (step 1e-3).
// The projection weights c are drawn from `rng` so every output coordinate
// participates. Relative error uses max(|analytic|, |numeric|, 1e-3) as
// denominator.
GradCheckReport grad_check(const Net& net, const ParamStore& store, const Tensor& input,
                           double tolerance, Rng& rng);

}  // namespace sgrd
