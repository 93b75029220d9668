#include "sgrd/optim.hpp"

#include <cmath>

#include "sgrd/error.hpp"

namespace sgrd {

void adam_step(ParamStore& store, const GradMap& grads, const AdamConfig& config) {
  for (const auto& [name, g] : grads) {
    const Tensor& p = store.at(name);
    if (!p.same_shape(g)) {
      throw ConfigError("gradient shape " + shape_to_string(g.shape) + " does not match " + name +
                        " " + shape_to_string(p.shape));
    }
    if (!g.all_finite()) throw NumericError("non-finite gradient for parameter " + name);
  }
  store.step += 1;
  double t = static_cast<double>(store.step);
  float bc1 = 1.0f - static_cast<float>(std::pow(static_cast<double>(config.beta1), t));
  float bc2 = 1.0f - static_cast<float>(std::pow(static_cast<double>(config.beta2), t));
  for (const auto& [name, g] : grads) {
    Tensor& p = store.params.at(name);
    Tensor& m = store.m.at(name);
    Tensor& v = store.v.at(name);
    for (int i = 0; i < p.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0f - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0f - config.beta2) * g[i] * g[i];
      float mhat = m[i] / bc1;
      float vhat = v[i] / bc2;
      p[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
}

float clip_grad_norm(GradMap& grads, float max_norm) {
  double sq = 0.0;
  for (const auto& [name, g] : grads) sq += g.squared_norm();
  float norm = static_cast<float>(std::sqrt(sq));
  if (norm > max_norm && norm > 0.0f) {
    float scale = max_norm / norm;
    for (auto& [name, g] : grads) {
      for (auto& x : g.data) x *= scale;
    }
  }
  return norm;
}

}  // namespace sgrd
