#include "sgrd/tensor.hpp"

#include <cmath>
#include <sstream>

#include "sgrd/error.hpp"

namespace sgrd {

int shape_size(const std::vector<int>& shape) {
  int n = 1;
  for (int e : shape) {
    if (e <= 0) throw ConfigError("tensor extent must be positive, got " + std::to_string(e));
    n *= e;
  }
  return n;
}

std::string shape_to_string(const std::vector<int>& shape) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << "]";
  return out.str();
}

Tensor::Tensor(std::vector<int> s) : shape(std::move(s)) {
  data.assign(static_cast<std::size_t>(shape_size(shape)), 0.0f);
}

Tensor::Tensor(std::vector<int> s, std::vector<float> values) : shape(std::move(s)), data(std::move(values)) {
  if (static_cast<int>(data.size()) != shape_size(shape)) {
    throw ConfigError("tensor data length " + std::to_string(data.size()) +
                      " does not match shape " + shape_to_string(shape));
  }
}

Tensor Tensor::full(std::vector<int> s, float value) {
  Tensor t(std::move(s));
  t.fill(value);
  return t;
}

void Tensor::fill(float value) {
  for (auto& x : data) x = value;
}

bool Tensor::all_finite() const {
  for (float x : data) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

double Tensor::squared_norm() const {
  double s = 0.0;
  for (float x : data) s += static_cast<double>(x) * x;
  return s;
}

double Tensor::norm() const { return std::sqrt(squared_norm()); }

}  // namespace sgrd
