#include "sgrd/net.hpp"

#include <cmath>
#include <cstring>
#include <functional>
#include <type_traits>

#include "sgrd/error.hpp"

namespace sgrd {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::recurrent_bi: return "recurrent-bidirectional";
    case LayerKind::relu: return "relu";
    case LayerKind::tanh: return "tanh";
    case LayerKind::l2_normalize: return "l2-normalize";
    case LayerKind::softmax: return "softmax";
    case LayerKind::mean_pool: return "mean-pool";
  }
  return "?";
}

LayerSpec LayerSpec::make_dense(int in, int out, float init_scale) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.in = in;
  s.out = out;
  s.init_scale = init_scale;
  return s;
}
LayerSpec LayerSpec::make_conv2d(int in_channels, int out_channels, int kernel, int stride) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.in_channels = in_channels;
  s.out_channels = out_channels;
  s.kernel = kernel;
  s.stride = stride;
  return s;
}
LayerSpec LayerSpec::make_recurrent_bi(int features, int hidden) {
  LayerSpec s;
  s.kind = LayerKind::recurrent_bi;
  s.features = features;
  s.hidden = hidden;
  return s;
}
LayerSpec LayerSpec::make_relu() { return LayerSpec{LayerKind::relu}; }
LayerSpec LayerSpec::make_tanh() { return LayerSpec{LayerKind::tanh}; }
LayerSpec LayerSpec::make_l2_normalize() { return LayerSpec{LayerKind::l2_normalize}; }
LayerSpec LayerSpec::make_softmax() { return LayerSpec{LayerKind::softmax}; }
LayerSpec LayerSpec::make_mean_pool() { return LayerSpec{LayerKind::mean_pool}; }

Tensor& ParamStore::at(const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}
const Tensor& ParamStore::at(const std::string& name) const {
  auto it = params.find(name);
  if (it == params.end()) throw ConfigError("unknown parameter: " + name);
  return it->second;
}
void ParamStore::add(const std::string& name, Tensor t) {
  if (params.count(name)) throw ConfigError("duplicate parameter: " + name);
  m.emplace(name, Tensor::zeros(t.shape));
  v.emplace(name, Tensor::zeros(t.shape));
  params.emplace(name, std::move(t));
}

Tensor& grad_slot(GradMap& grads, const std::string& name, const std::vector<int>& shape) {
  auto it = grads.find(name);
  if (it == grads.end()) it = grads.emplace(name, Tensor::zeros(shape)).first;
  return it->second;
}

void grad_accumulate(GradMap& grads, const std::string& name, const Tensor& like) {
  Tensor& g = grad_slot(grads, name, like.shape);
  for (int i = 0; i < like.size(); ++i) g[i] += like[i];
}

namespace {

template <typename T>
T sigmoid_t(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <typename T>
void dense_value(const T* w, const T* b, const T* x, int in, int out, T* y) {
  for (int o = 0; o < out; ++o) {
    T acc = b[o];
    const T* wrow = w + static_cast<std::size_t>(o) * in;
    for (int i = 0; i < in; ++i) acc += wrow[i] * x[i];
    y[o] = acc;
  }
}

struct ConvDims {
  int c, h, w, oc, k, s, oh, ow;
};

template <typename T>
void conv2d_value(const T* w, const T* b, const T* x, const ConvDims& d, T* y) {
  for (int oc = 0; oc < d.oc; ++oc) {
    for (int oy = 0; oy < d.oh; ++oy) {
      for (int ox = 0; ox < d.ow; ++ox) {
        T acc = b[oc];
        for (int c = 0; c < d.c; ++c) {
          const T* xc = x + (static_cast<std::size_t>(c) * d.h + oy * d.s) * d.w + ox * d.s;
          const T* wc = w + ((static_cast<std::size_t>(oc) * d.c + c) * d.k) * d.k;
          for (int ky = 0; ky < d.k; ++ky) {
            const T* xrow = xc + static_cast<std::size_t>(ky) * d.w;
            const T* wrow = wc + static_cast<std::size_t>(ky) * d.k;
            for (int kx = 0; kx < d.k; ++kx) acc += wrow[kx] * xrow[kx];
          }
        }
        y[(static_cast<std::size_t>(oc) * d.oh + oy) * d.ow + ox] = acc;
      }
    }
  }
}

// One gated-recurrent step; optionally records gate values for backward.
template <typename T>
void gru_step_value(const T* w, const T* u, const T* b, const T* x, const T* h_prev,
                    int f, int h, T* h_out, T* z_c, T* r_c, T* n_c, T* u_c) {
  std::vector<T> a(3 * h);
  dense_value(w, b, x, f, 3 * h, a.data());
  std::vector<T> uh(3 * h);
  for (int o = 0; o < 3 * h; ++o) {
    T acc = T(0);
    const T* urow = u + static_cast<std::size_t>(o) * h;
    for (int i = 0; i < h; ++i) acc += urow[i] * h_prev[i];
    uh[o] = acc;
  }
  for (int i = 0; i < h; ++i) {
    T z = sigmoid_t(a[i] + uh[i]);
    T r = sigmoid_t(a[h + i] + uh[h + i]);
    T un = uh[2 * h + i];
    T n = std::tanh(a[2 * h + i] + r * un);
    h_out[i] = (T(1) - z) * n + z * h_prev[i];
    if (z_c) {
      z_c[i] = z;
      r_c[i] = r;
      n_c[i] = n;
      u_c[i] = un;
    }
  }
}

template <typename T>
using ParamFetch = std::function<const T*(const std::string&)>;

}  // namespace

GruCell::GruCell(int features_, int hidden_, std::string prefix_)
    : features(features_), hidden(hidden_), prefix(std::move(prefix_)) {}

void GruCell::init_params(ParamStore& store, Rng& rng) const {
  float lim = 1.0f / std::sqrt(static_cast<float>(hidden));
  auto uniform_tensor = [&](std::vector<int> shape) {
    Tensor t(std::move(shape));
    for (auto& x : t.data) x = static_cast<float>(rng.uniform(-lim, lim));
    return t;
  };
  store.add(prefix + ".w", uniform_tensor({3 * hidden, features}));
  store.add(prefix + ".u", uniform_tensor({3 * hidden, hidden}));
  store.add(prefix + ".b", uniform_tensor({3 * hidden}));
}

void GruCell::forward(const ParamStore& store, const float* x, const float* h_prev,
                      float* h_out, StepCache* cache) const {
  const Tensor& w = store.at(prefix + ".w");
  const Tensor& u = store.at(prefix + ".u");
  const Tensor& b = store.at(prefix + ".b");
  if (cache) {
    cache->x.assign(x, x + features);
    cache->h_prev.assign(h_prev, h_prev + hidden);
    cache->z.resize(hidden);
    cache->r.resize(hidden);
    cache->n.resize(hidden);
    cache->u.resize(hidden);
  }
  gru_step_value<float>(w.data.data(), u.data.data(), b.data.data(), x, h_prev, features,
                        hidden, h_out, cache ? cache->z.data() : nullptr,
                        cache ? cache->r.data() : nullptr, cache ? cache->n.data() : nullptr,
                        cache ? cache->u.data() : nullptr);
}

void GruCell::backward(const ParamStore& store, const StepCache& cache, const float* dh,
                       float* dx, float* dh_prev, GradMap& grads) const {
  const int h = hidden;
  const int f = features;
  const Tensor& w = store.at(prefix + ".w");
  const Tensor& u = store.at(prefix + ".u");
  Tensor& gw = grad_slot(grads, prefix + ".w", w.shape);
  Tensor& gu = grad_slot(grads, prefix + ".u", u.shape);
  Tensor& gb = grad_slot(grads, prefix + ".b", {3 * h});

  // gate pre-activation grads, packed z|r|n
  std::vector<float> da(3 * h);
  std::vector<float> du_n(h);
  for (int i = 0; i < h; ++i) {
    float z = cache.z[i], r = cache.r[i], n = cache.n[i], un = cache.u[i];
    float g = dh[i];
    float dz = g * (cache.h_prev[i] - n);
    float dn = g * (1.0f - z);
    float dan = dn * (1.0f - n * n);
    da[2 * h + i] = dan;
    du_n[i] = dan * r;
    float dr = dan * un;
    da[h + i] = dr * r * (1.0f - r);
    da[i] = dz * z * (1.0f - z);
  }

  for (int i = 0; i < f; ++i) dx[i] = 0.0f;
  for (int i = 0; i < h; ++i) dh_prev[i] = cache.z[i] * dh[i];

  for (int o = 0; o < 3 * h; ++o) {
    float g = da[o];
    gb[o] += g;
    float* gwrow = gw.data.data() + static_cast<std::size_t>(o) * f;
    const float* wrow = w.data.data() + static_cast<std::size_t>(o) * f;
    for (int i = 0; i < f; ++i) {
      gwrow[i] += g * cache.x[i];
      dx[i] += wrow[i] * g;
    }
  }
  // u grads: rows z and r use da directly, row n uses du_n
  for (int o = 0; o < 2 * h; ++o) {
    float g = da[o];
    float* gurow = gu.data.data() + static_cast<std::size_t>(o) * h;
    const float* urow = u.data.data() + static_cast<std::size_t>(o) * h;
    for (int i = 0; i < h; ++i) {
      gurow[i] += g * cache.h_prev[i];
      dh_prev[i] += urow[i] * g;
    }
  }
  for (int i = 0; i < h; ++i) {
    int o = 2 * h + i;
    float g = du_n[i];
    float* gurow = gu.data.data() + static_cast<std::size_t>(o) * h;
    const float* urow = u.data.data() + static_cast<std::size_t>(o) * h;
    for (int j = 0; j < h; ++j) {
      gurow[j] += g * cache.h_prev[j];
      dh_prev[j] += urow[j] * g;
    }
  }
}

Net::Net(std::string name, std::vector<LayerSpec> layers)
    : name_(std::move(name)), layers_(std::move(layers)) {}

std::string Net::param_name(int layer, const char* leaf) const {
  return name_ + "." + std::to_string(layer) + "." + leaf;
}

void Net::init_params(ParamStore& store, Rng& rng) const {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    int li = static_cast<int>(i);
    switch (l.kind) {
      case LayerKind::dense: {
        float lim = std::sqrt(6.0f / static_cast<float>(l.in + l.out)) * l.init_scale;
        Tensor w({l.out, l.in});
        for (auto& x : w.data) x = static_cast<float>(rng.uniform(-lim, lim));
        store.add(param_name(li, "w"), std::move(w));
        store.add(param_name(li, "b"), Tensor::zeros({l.out}));
        break;
      }
      case LayerKind::conv2d: {
        int fan_in = l.in_channels * l.kernel * l.kernel;
        int fan_out = l.out_channels * l.kernel * l.kernel;
        float lim = std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
        Tensor w({l.out_channels, l.in_channels, l.kernel, l.kernel});
        for (auto& x : w.data) x = static_cast<float>(rng.uniform(-lim, lim));
        store.add(param_name(li, "w"), std::move(w));
        store.add(param_name(li, "b"), Tensor::zeros({l.out_channels}));
        break;
      }
      case LayerKind::recurrent_bi: {
        GruCell fwd(l.features, l.hidden, param_name(li, "f"));
        GruCell bwd(l.features, l.hidden, param_name(li, "b"));
        fwd.init_params(store, rng);
        bwd.init_params(store, rng);
        break;
      }
      default:
        break;
    }
  }
}

std::vector<std::string> Net::param_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    int li = static_cast<int>(i);
    switch (layers_[i].kind) {
      case LayerKind::dense:
      case LayerKind::conv2d:
        names.push_back(param_name(li, "w"));
        names.push_back(param_name(li, "b"));
        break;
      case LayerKind::recurrent_bi:
        for (const char* dir : {"f", "b"}) {
          names.push_back(param_name(li, dir) + ".w");
          names.push_back(param_name(li, dir) + ".u");
          names.push_back(param_name(li, dir) + ".b");
        }
        break;
      default:
        break;
    }
  }
  return names;
}

std::vector<int> Net::output_shape(const std::vector<int>& input_shape) const {
  std::vector<int> shape = input_shape;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& l = layers_[i];
    auto fail = [&](const std::string& why) -> ConfigError {
      return ConfigError(name_ + " layer " + std::to_string(i) + " (" + to_string(l.kind) +
                         "): " + why + ", input shape " + shape_to_string(shape));
    };
    switch (l.kind) {
      case LayerKind::dense:
        if (shape_size(shape) != l.in) throw fail("expects " + std::to_string(l.in) + " inputs");
        shape = {l.out};
        break;
      case LayerKind::conv2d: {
        if (shape.size() != 3 || shape[0] != l.in_channels) {
          throw fail("expects [channels=" + std::to_string(l.in_channels) + ", h, w]");
        }
        if (shape[1] < l.kernel || shape[2] < l.kernel) throw fail("spatial extent below kernel");
        int oh = (shape[1] - l.kernel) / l.stride + 1;
        int ow = (shape[2] - l.kernel) / l.stride + 1;
        shape = {l.out_channels, oh, ow};
        break;
      }
      case LayerKind::recurrent_bi:
        if (shape.size() != 2 || shape[1] != l.features) {
          throw fail("expects [t, features=" + std::to_string(l.features) + "]");
        }
        shape = {shape[0], 2 * l.hidden};
        break;
      case LayerKind::mean_pool:
        if (shape.size() != 2) throw fail("expects a rank-2 input");
        shape = {shape[1]};
        break;
      case LayerKind::softmax:
        if (shape.size() != 1) throw fail("expects a rank-1 input");
        break;
      case LayerKind::relu:
      case LayerKind::tanh:
      case LayerKind::l2_normalize:
        break;
    }
  }
  return shape;
}

namespace {

// Shared value path: float32 with optional cache capture, float64 for the
// finite-difference oracles.
template <typename T>
std::vector<T> evaluate_net(const std::string& net_name, const std::vector<LayerSpec>& layers,
                            const ParamFetch<T>& fetch, std::vector<T> x,
                            std::vector<int> shape, NetCache* cache) {
  constexpr bool kFloatPath = std::is_same_v<T, float>;
  auto pname = [&](std::size_t i, const char* leaf) {
    return net_name + "." + std::to_string(i) + "." + leaf;
  };
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerSpec& l = layers[i];
    std::vector<Tensor>* saved_slot = nullptr;
    if constexpr (kFloatPath) {
      if (cache) saved_slot = &cache->saved[i];
    }
    auto save = [&](const std::vector<T>& v, const std::vector<int>& sh) {
      if constexpr (kFloatPath) {
        if (saved_slot) saved_slot->push_back(Tensor(sh, v));
      }
    };
    auto save_scalar = [&](double v) {
      if constexpr (kFloatPath) {
        if (saved_slot) {
          Tensor t({1});
          t[0] = static_cast<float>(v);
          saved_slot->push_back(t);
        }
      }
    };
    const bool saved = saved_slot != nullptr;
    (void)saved;
    switch (l.kind) {
      case LayerKind::dense: {
        if (saved) save(x, shape);
        std::vector<T> y(l.out);
        dense_value(fetch(pname(i, "w")), fetch(pname(i, "b")), x.data(), l.in, l.out, y.data());
        x = std::move(y);
        shape = {l.out};
        break;
      }
      case LayerKind::conv2d: {
        if (saved) save(x, shape);
        ConvDims d{l.in_channels, shape[1], shape[2], l.out_channels, l.kernel, l.stride, 0, 0};
        d.oh = (d.h - d.k) / d.s + 1;
        d.ow = (d.w - d.k) / d.s + 1;
        std::vector<T> y(static_cast<std::size_t>(d.oc) * d.oh * d.ow);
        conv2d_value(fetch(pname(i, "w")), fetch(pname(i, "b")), x.data(), d, y.data());
        x = std::move(y);
        shape = {d.oc, d.oh, d.ow};
        break;
      }
      case LayerKind::recurrent_bi: {
        int t_len = shape[0];
        int f = l.features;
        int h = l.hidden;
        const T* w_f = fetch(pname(i, "f") + ".w");
        const T* u_f = fetch(pname(i, "f") + ".u");
        const T* b_f = fetch(pname(i, "f") + ".b");
        const T* w_b = fetch(pname(i, "b") + ".w");
        const T* u_b = fetch(pname(i, "b") + ".u");
        const T* b_b = fetch(pname(i, "b") + ".b");
        std::vector<T> y(static_cast<std::size_t>(t_len) * 2 * h);
        std::vector<T> hf(h, T(0)), hb(h, T(0)), hn(h);
        std::vector<GruCell::StepCache>* cf = nullptr;
        std::vector<GruCell::StepCache>* cb = nullptr;
        if constexpr (kFloatPath) {
          if (cache) {
            cf = &cache->gru_fwd[i];
            cb = &cache->gru_bwd[i];
            cf->resize(t_len);
            cb->resize(t_len);
          }
        }
        auto run_step = [&](const T* w, const T* u, const T* b, const T* xt, T* h_prev,
                            GruCell::StepCache* sc) {
          if constexpr (kFloatPath) {
            if (sc) {
              sc->x.assign(xt, xt + f);
              sc->h_prev.assign(h_prev, h_prev + h);
              sc->z.resize(h);
              sc->r.resize(h);
              sc->n.resize(h);
              sc->u.resize(h);
              gru_step_value<T>(w, u, b, xt, h_prev, f, h, hn.data(), sc->z.data(), sc->r.data(),
                                sc->n.data(), sc->u.data());
              return;
            }
          }
          (void)sc;
          gru_step_value<T>(w, u, b, xt, h_prev, f, h, hn.data(), nullptr, nullptr, nullptr,
                            nullptr);
        };
        for (int t = 0; t < t_len; ++t) {
          run_step(w_f, u_f, b_f, x.data() + static_cast<std::size_t>(t) * f, hf.data(),
                   cf ? &(*cf)[t] : nullptr);
          std::copy(hn.begin(), hn.end(), hf.begin());
          std::copy(hn.begin(), hn.end(), y.begin() + static_cast<std::size_t>(t) * 2 * h);
        }
        for (int t = t_len - 1; t >= 0; --t) {
          run_step(w_b, u_b, b_b, x.data() + static_cast<std::size_t>(t) * f, hb.data(),
                   cb ? &(*cb)[t] : nullptr);
          std::copy(hn.begin(), hn.end(), hb.begin());
          std::copy(hn.begin(), hn.end(), y.begin() + static_cast<std::size_t>(t) * 2 * h + h);
        }
        x = std::move(y);
        shape = {t_len, 2 * h};
        break;
      }
      case LayerKind::relu: {
        if (saved) save(x, shape);
        for (auto& v : x) v = v > T(0) ? v : T(0);
        break;
      }
      case LayerKind::tanh: {
        for (auto& v : x) v = std::tanh(v);
        if (saved) save(x, shape);
        break;
      }
      case LayerKind::l2_normalize: {
        if (saved) save(x, shape);
        double sq = 0.0;
        for (auto& v : x) sq += static_cast<double>(v) * static_cast<double>(v);
        double nrm = std::sqrt(sq);
        if (nrm < 1e-6) {
          throw NumericError(net_name + " layer " + std::to_string(i) +
                             " (l2-normalize): input norm " + std::to_string(nrm) +
                             " below 1e-6");
        }
        for (auto& v : x) v = static_cast<T>(v / static_cast<T>(nrm));
        if (saved) {
          save(x, shape);
          save_scalar(nrm);
        }
        break;
      }
      case LayerKind::softmax: {
        T mx = x[0];
        for (auto v : x) mx = std::max(mx, v);
        T sum = T(0);
        for (auto& v : x) {
          v = std::exp(v - mx);
          sum += v;
        }
        for (auto& v : x) v /= sum;
        if (saved) save(x, shape);
        break;
      }
      case LayerKind::mean_pool: {
        if (saved) save(x, shape);
        int t_len = shape[0], d = shape[1];
        std::vector<T> y(d, T(0));
        for (int t = 0; t < t_len; ++t) {
          for (int j = 0; j < d; ++j) y[j] += x[static_cast<std::size_t>(t) * d + j];
        }
        for (auto& v : y) v /= static_cast<T>(t_len);
        x = std::move(y);
        shape = {d};
        break;
      }
    }
  }
  return x;
}

}  // namespace

Tensor Net::forward(const ParamStore& store, const Tensor& input, NetCache* cache) const {
  std::vector<int> out_shape = output_shape(input.shape);  // validates
  if (cache) {
    cache->input = input;
    cache->saved.assign(layers_.size(), {});
    cache->gru_fwd.assign(layers_.size(), {});
    cache->gru_bwd.assign(layers_.size(), {});
  }
  ParamFetch<float> fetch = [&](const std::string& n) { return store.at(n).data.data(); };
  std::vector<float> y = evaluate_net<float>(name_, layers_, fetch, input.data, input.shape, cache);
  Tensor out(out_shape, std::move(y));
  if (cache) cache->output = out;
  return out;
}

std::vector<double> Net::forward_f64(const F64Params& params, const std::vector<double>& input,
                                     const std::vector<int>& input_shape) const {
  ParamFetch<double> fetch = [&](const std::string& n) -> const double* {
    auto it = params.find(n);
    if (it == params.end()) throw ConfigError("unknown parameter: " + n);
    return it->second.data();
  };
  return evaluate_net<double>(name_, layers_, fetch, input, input_shape, nullptr);
}

Tensor Net::backward(const ParamStore& store, const NetCache& cache, const Tensor& grad_out,
                     GradMap& grads) const {
  if (cache.saved.size() != layers_.size()) {
    throw UsageError(name_ + ": backward called without a forward cache");
  }
  if (!grad_out.same_shape(cache.output)) {
    throw ConfigError(name_ + ": output gradient shape " + shape_to_string(grad_out.shape) +
                      " does not match forward output " + shape_to_string(cache.output.shape));
  }
  Tensor dy = grad_out;
  for (int li = static_cast<int>(layers_.size()) - 1; li >= 0; --li) {
    const LayerSpec& l = layers_[li];
    const std::vector<Tensor>& saved = cache.saved[li];
    switch (l.kind) {
      case LayerKind::dense: {
        const Tensor& x = saved[0];
        const Tensor& w = store.at(param_name(li, "w"));
        Tensor& gw = grad_slot(grads, param_name(li, "w"), w.shape);
        Tensor& gb = grad_slot(grads, param_name(li, "b"), {l.out});
        Tensor dx(x.shape);
        for (int o = 0; o < l.out; ++o) {
          float g = dy[o];
          gb[o] += g;
          float* gwrow = gw.data.data() + static_cast<std::size_t>(o) * l.in;
          const float* wrow = w.data.data() + static_cast<std::size_t>(o) * l.in;
          for (int i = 0; i < l.in; ++i) {
            gwrow[i] += g * x[i];
            dx[i] += wrow[i] * g;
          }
        }
        dy = std::move(dx);
        break;
      }
      case LayerKind::conv2d: {
        const Tensor& x = saved[0];
        ConvDims d{l.in_channels, x.shape[1], x.shape[2], l.out_channels, l.kernel, l.stride, 0, 0};
        d.oh = (d.h - d.k) / d.s + 1;
        d.ow = (d.w - d.k) / d.s + 1;
        const Tensor& w = store.at(param_name(li, "w"));
        Tensor& gw = grad_slot(grads, param_name(li, "w"), w.shape);
        Tensor& gb = grad_slot(grads, param_name(li, "b"), {d.oc});
        Tensor dx(x.shape);
        for (int oc = 0; oc < d.oc; ++oc) {
          for (int oy = 0; oy < d.oh; ++oy) {
            for (int ox = 0; ox < d.ow; ++ox) {
              float g = dy[(static_cast<std::size_t>(oc) * d.oh + oy) * d.ow + ox];
              gb[oc] += g;
              for (int c = 0; c < d.c; ++c) {
                std::size_t xbase = (static_cast<std::size_t>(c) * d.h + oy * d.s) * d.w + ox * d.s;
                std::size_t wbase = ((static_cast<std::size_t>(oc) * d.c + c) * d.k) * d.k;
                for (int ky = 0; ky < d.k; ++ky) {
                  for (int kx = 0; kx < d.k; ++kx) {
                    std::size_t xi = xbase + static_cast<std::size_t>(ky) * d.w + kx;
                    gw[wbase + ky * d.k + kx] += g * x[xi];
                    dx[xi] += w[wbase + ky * d.k + kx] * g;
                  }
                }
              }
            }
          }
        }
        dy = std::move(dx);
        break;
      }
      case LayerKind::recurrent_bi: {
        const auto& cf = cache.gru_fwd[li];
        const auto& cb = cache.gru_bwd[li];
        int t_len = static_cast<int>(cf.size());
        int f = l.features;
        int h = l.hidden;
        GruCell fwd(f, h, param_name(li, "f"));
        GruCell bwd(f, h, param_name(li, "b"));
        Tensor dx({t_len, f});
        std::vector<float> dh(h), dh_prev(h), dxt(f);
        // forward direction: scan t = T-1 .. 0
        std::fill(dh.begin(), dh.end(), 0.0f);
        for (int t = t_len - 1; t >= 0; --t) {
          for (int j = 0; j < h; ++j) dh[j] += dy[static_cast<std::size_t>(t) * 2 * h + j];
          fwd.backward(store, cf[t], dh.data(), dxt.data(), dh_prev.data(), grads);
          for (int j = 0; j < f; ++j) dx[static_cast<std::size_t>(t) * f + j] += dxt[j];
          dh = dh_prev;
        }
        // backward direction: scan t = 0 .. T-1
        std::fill(dh.begin(), dh.end(), 0.0f);
        for (int t = 0; t < t_len; ++t) {
          for (int j = 0; j < h; ++j) dh[j] += dy[static_cast<std::size_t>(t) * 2 * h + h + j];
          bwd.backward(store, cb[t], dh.data(), dxt.data(), dh_prev.data(), grads);
          for (int j = 0; j < f; ++j) dx[static_cast<std::size_t>(t) * f + j] += dxt[j];
          dh = dh_prev;
        }
        dy = std::move(dx);
        break;
      }
      case LayerKind::relu: {
        const Tensor& x = saved[0];
        for (int i = 0; i < dy.size(); ++i) {
          if (x[i] <= 0.0f) dy[i] = 0.0f;
        }
        break;
      }
      case LayerKind::tanh: {
        const Tensor& y = saved[0];
        for (int i = 0; i < dy.size(); ++i) dy[i] *= 1.0f - y[i] * y[i];
        break;
      }
      case LayerKind::l2_normalize: {
        const Tensor& v = saved[1];
        float nrm = saved[2][0];
        double vdot = 0.0;
        for (int i = 0; i < dy.size(); ++i) vdot += static_cast<double>(v[i]) * dy[i];
        for (int i = 0; i < dy.size(); ++i) {
          dy[i] = (dy[i] - v[i] * static_cast<float>(vdot)) / nrm;
        }
        break;
      }
      case LayerKind::softmax: {
        const Tensor& p = saved[0];
        double dot = 0.0;
        for (int i = 0; i < dy.size(); ++i) dot += static_cast<double>(p[i]) * dy[i];
        for (int i = 0; i < dy.size(); ++i) {
          dy[i] = p[i] * (dy[i] - static_cast<float>(dot));
        }
        break;
      }
      case LayerKind::mean_pool: {
        const Tensor& x = saved[0];
        int t_len = x.shape[0], d = x.shape[1];
        Tensor dx(x.shape);
        float inv = 1.0f / static_cast<float>(t_len);
        for (int t = 0; t < t_len; ++t) {
          for (int j = 0; j < d; ++j) dx[static_cast<std::size_t>(t) * d + j] = dy[j] * inv;
        }
        dy = std::move(dx);
        break;
      }
    }
  }
  return dy;
}

F64Params params_to_f64(const ParamStore& store) {
  F64Params out;
  for (const auto& [name, t] : store.params) {
    std::vector<double> v(t.data.begin(), t.data.end());
    out.emplace(name, std::move(v));
  }
  return out;
}

}  // namespace sgrd
