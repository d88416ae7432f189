#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace sketchgen {

using Vector = std::vector<double>;

/// Dense row-major matrix. Vectors are multiplied from the left (x·W), so a
/// layer mapping n inputs to m outputs is stored as an n×m matrix.
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(std::string name, std::size_t rows, std::size_t cols)
      : name(std::move(name)), rows(rows), cols(cols), v(rows * cols, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return v[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return v[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {v.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {v.data() + r * cols, cols}; }

  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool operator==(const Tensor&) const = default;
};

/// out += x·W
void add_vec_mat(std::span<const double> x, const Tensor& W, std::span<double> out);
/// out += W·g  (backpropagation through x·W)
void add_mat_vec(const Tensor& W, std::span<const double> g, std::span<double> out);
/// G += xᵀ·g
void add_outer(Tensor& G, std::span<const double> x, std::span<const double> g);
void add_to(std::span<double> out, std::span<const double> x, double scale = 1.0);

double dot(std::span<const double> a, std::span<const double> b);

/// Max-shifted softmax; entries where `mask` is false get probability 0.
Vector softmax(std::span<const double> logits, const std::vector<bool>* mask = nullptr);

/// Uniform in ±sqrt(6/(fan_in+fan_out)).
void glorot_uniform(Tensor& t, std::mt19937_64& rng);

}  // namespace sketchgen
