#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sgrd {

// Dense row-major float32 tensor. Shapes are lists of positive extents; the
// data length always equals the product of the extents.
struct Tensor {
  std::vector<int> shape;
  std::vector<float> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> s);
  Tensor(std::vector<int> s, std::vector<float> values);

  static Tensor zeros(std::vector<int> s) { return Tensor(std::move(s)); }
  static Tensor full(std::vector<int> s, float value);

  int size() const { return static_cast<int>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }

  float& operator[](int i) { return data[static_cast<std::size_t>(i)]; }
  float operator[](int i) const { return data[static_cast<std::size_t>(i)]; }

  // 2-D accessors, [rows, cols] row-major.
  float& at(int r, int c) { return data[static_cast<std::size_t>(r) * shape[1] + c]; }
  float at(int r, int c) const { return data[static_cast<std::size_t>(r) * shape[1] + c]; }

  void fill(float value);
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
  bool all_finite() const;

  double squared_norm() const;
  double norm() const;
};

int shape_size(const std::vector<int>& shape);
std::string shape_to_string(const std::vector<int>& shape);

}  // namespace sgrd
