#pragma once

#include "sgrd/net.hpp"

namespace sgrd {

struct AdamConfig {
  float lr = 1e-3f;
  float beta1 = 0.9f;
  float beta2 = 0.999f;
  float eps = 1e-8f;
};

// Bias-corrected Adam over every gradient in `grads`. Validates all gradients
// finite before mutating anything; a non-finite gradient aborts the whole
// step and reports the parameter name. Increments store.step by exactly 1.
void adam_step(ParamStore& store, const GradMap& grads, const AdamConfig& config);

// Scales all gradients so their global L2 norm is at most `max_norm`.
// Returns the pre-clip norm.
float clip_grad_norm(GradMap& grads, float max_norm);

}  // namespace sgrd
