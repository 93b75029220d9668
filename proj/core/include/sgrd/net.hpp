#pragma once

#include <map>
#include <string>
#include <vector>

#include "sgrd/rng.hpp"
#include "sgrd/tensor.hpp"

namespace sgrd {

enum class LayerKind {
  dense,
  conv2d,
  recurrent_bi,
  relu,
  tanh,
  l2_normalize,
  softmax,
  mean_pool,
};

const char* to_string(LayerKind kind);

// One layer of a fixed sequential topology. Output shape is a total function
// of input shape and the hyperparameters below.
struct LayerSpec {
  LayerKind kind{LayerKind::relu};

  // dense
  int in = 0;
  int out = 0;
  float init_scale = 1.0f;

  // conv2d (valid padding)
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;

  // recurrent-bidirectional: gated recurrent cell per direction over [T, features]
  int features = 0;
  int hidden = 0;

  static LayerSpec make_dense(int in, int out, float init_scale = 1.0f);
  static LayerSpec make_conv2d(int in_channels, int out_channels, int kernel, int stride);
  static LayerSpec make_recurrent_bi(int features, int hidden);
  static LayerSpec make_relu();
  static LayerSpec make_tanh();
  static LayerSpec make_l2_normalize();
  static LayerSpec make_softmax();
  static LayerSpec make_mean_pool();
};

// Named parameters plus Adam moment accumulators. The moment tensors always
// shape-match their parameter; `step` increments by exactly 1 per optimizer
// step.
struct ParamStore {
  std::map<std::string, Tensor> params;
  std::map<std::string, Tensor> m;
  std::map<std::string, Tensor> v;
  long long step = 0;

  Tensor& at(const std::string& name);
  const Tensor& at(const std::string& name) const;
  void add(const std::string& name, Tensor t);
};

using GradMap = std::map<std::string, Tensor>;

// Adds `t` into grads[name] (allocating zeros on first touch).
void grad_accumulate(GradMap& grads, const std::string& name, const Tensor& like);
Tensor& grad_slot(GradMap& grads, const std::string& name, const std::vector<int>& shape);

// Minimal gated recurrent cell. Gate parameters are packed z|r|n into
// w: [3H, F], u: [3H, H], b: [3H].
//   z = sigmoid(Wz x + Uz h + bz)
//   r = sigmoid(Wr x + Ur h + br)
//   n = tanh(Wn x + r * (Un h) + bn)
//   h' = (1 - z) * n + z * h
struct GruCell {
  int features = 0;
  int hidden = 0;
  std::string prefix;

  GruCell() = default;
  GruCell(int features, int hidden, std::string prefix);

  struct StepCache {
    std::vector<float> x, h_prev, z, r, n, u;
  };

  void init_params(ParamStore& store, Rng& rng) const;
  void forward(const ParamStore& store, const float* x, const float* h_prev,
               float* h_out, StepCache* cache) const;
  // Writes dx and dh_prev (overwriting), accumulates parameter grads.
  void backward(const ParamStore& store, const StepCache& cache, const float* dh,
                float* dx, float* dh_prev, GradMap& grads) const;
};

struct NetCache {
  Tensor input;
  // per-layer saved tensors; meaning depends on the layer kind
  std::vector<std::vector<Tensor>> saved;
  std::vector<std::vector<GruCell::StepCache>> gru_fwd;
  std::vector<std::vector<GruCell::StepCache>> gru_bwd;
  Tensor output;
};

using F64Params = std::map<std::string, std::vector<double>>;

// Fixed sequential network over LayerSpecs. Parameters live in an external
// ParamStore under "<name>.<layer index>.<w|b|...>".
class Net {
 public:
  Net() = default;
  Net(std::string name, std::vector<LayerSpec> layers);

  const std::string& name() const { return name_; }
  const std::vector<LayerSpec>& layers() const { return layers_; }

  void init_params(ParamStore& store, Rng& rng) const;
  std::vector<std::string> param_names() const;

  // Validates the layer stack against `input_shape`; throws ConfigError
  // naming the offending layer on any mismatch.
  std::vector<int> output_shape(const std::vector<int>& input_shape) const;

  // Deterministic forward pass; fills `cache` (when given) with everything
  // backward needs.
  Tensor forward(const ParamStore& store, const Tensor& input, NetCache* cache = nullptr) const;

  // Gradients w.r.t. every parameter (accumulated into `grads`) and the
  // input (returned). Requires the cache of a forward run on the same input.
  Tensor backward(const ParamStore& store, const NetCache& cache, const Tensor& grad_out,
                  GradMap& grads) const;

  // Value-only forward in 64-bit arithmetic, for finite-difference oracles.
  std::vector<double> forward_f64(const F64Params& params, const std::vector<double>& input,
                                  const std::vector<int>& input_shape) const;

  std::string param_name(int layer, const char* leaf) const;

 private:
  std::string name_;
  std::vector<LayerSpec> layers_;
};

F64Params params_to_f64(const ParamStore& store);

}  // namespace sgrd
