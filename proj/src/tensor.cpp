#include "sketchgen/tensor.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace sketchgen {

void add_vec_mat(std::span<const double> x, const Tensor& W, std::span<double> out) {
  assert(x.size() == W.rows && out.size() == W.cols);
  for (std::size_t r = 0; r < W.rows; ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    auto w = W.row(r);
    for (std::size_t c = 0; c < W.cols; ++c) out[c] += xr * w[c];
  }
}

void add_mat_vec(const Tensor& W, std::span<const double> g, std::span<double> out) {
  assert(g.size() == W.cols && out.size() == W.rows);
  for (std::size_t r = 0; r < W.rows; ++r) out[r] += dot(W.row(r), g);
}

void add_outer(Tensor& G, std::span<const double> x, std::span<const double> g) {
  assert(x.size() == G.rows && g.size() == G.cols);
  for (std::size_t r = 0; r < G.rows; ++r) {
    double xr = x[r];
    if (xr == 0.0) continue;
    auto row = G.row(r);
    for (std::size_t c = 0; c < G.cols; ++c) row[c] += xr * g[c];
  }
}

void add_to(std::span<double> out, std::span<const double> x, double scale) {
  assert(out.size() == x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * x[i];
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Vector softmax(std::span<const double> logits, const std::vector<bool>* mask) {
  auto allowed = [&](std::size_t i) { return !mask || (*mask)[i]; };
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < logits.size(); ++i)
    if (allowed(i)) hi = std::max(hi, logits[i]);
  Vector out(logits.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (!allowed(i)) continue;
    out[i] = std::exp(logits[i] - hi);
    total += out[i];
  }
  for (auto& p : out) p /= total;
  return out;
}

void glorot_uniform(Tensor& t, std::mt19937_64& rng) {
  double fan = static_cast<double>(t.rows + t.cols);
  double limit = fan > 0 ? std::sqrt(6.0 / fan) : 0.0;
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (auto& x : t.v) x = dist(rng);
}

}  // namespace sketchgen
