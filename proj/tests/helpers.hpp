#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "sgrd/net.hpp"

namespace sgrd::test {

inline Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.normal() * scale);
  return t;
}

// Finite differences are only meaningful away from relu kinks and with a
// healthy norm entering l2-normalize; resample until the instance is clean.
inline bool well_conditioned(const Net& net, const NetCache& cache, double kink_margin = 0.01,
                             double l2_floor = 0.5) {
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const LayerSpec& l = net.layers()[i];
    if (l.kind == LayerKind::relu) {
      for (float v : cache.saved[i][0].data) {
        if (std::abs(v) < kink_margin) return false;
      }
    }
    if (l.kind == LayerKind::l2_normalize) {
      if (cache.saved[i][0].norm() < l2_floor) return false;
    }
  }
  return true;
}

struct CheckInstance {
  ParamStore store;
  Tensor input;
};

inline CheckInstance conditioned_instance(const Net& net, const std::vector<int>& input_shape,
                                          std::uint64_t seed, int max_attempts = 200) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    CheckInstance inst;
    Rng rng(seed * 1000 + attempt);
    net.init_params(inst.store, rng);
    inst.input = random_tensor(input_shape, rng);
    NetCache cache;
    net.forward(inst.store, inst.input, &cache);
    if (well_conditioned(net, cache)) return inst;
  }
  throw std::runtime_error("no well-conditioned gradient-check instance found");
}

// Scratch directory under the system temp root, fresh per call.
inline std::string temp_dir(const std::string& tag) {
  auto path = std::filesystem::temp_directory_path() / ("sgrd_test_" + tag);
  std::filesystem::remove_all(path);
  std::filesystem::create_directories(path);
  return path.string();
}

}  // namespace sgrd::test
