#include "sketchgen/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sketchgen {

namespace {

// A random non-empty subset: its size is uniform on 1..n, so labels with a
// single element are as common as full ones.
EncodedLabel drop_elements(const EncodedLabel& label, std::mt19937_64& rng) {
  const std::size_t n = label.size();
  if (n <= 1) return label;
  std::vector<std::size_t> pos(n);
  std::iota(pos.begin(), pos.end(), std::size_t{0});
  std::shuffle(pos.begin(), pos.end(), rng);
  pos.resize(std::uniform_int_distribution<std::size_t>(1, n)(rng));
  std::vector<bool> keep(n);
  for (auto i : pos) keep[i] = true;
  EncodedLabel out;
  std::size_t i = 0;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k)
    for (int x : label.indices[k])
      if (keep[i++]) out.indices[k].push_back(x);
  return out;
}

}  // namespace

void adam_update(GedParams& p, const GedParams& grad, AdamState& s, double lr) {
  ++s.t;
  const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  auto ps = p.tensors();
  auto gs = grad.tensors();
  auto ms = s.m.tensors();
  auto vs = s.v.tensors();
  for (std::size_t k = 0; k < ps.size(); ++k) {
    auto& w = ps[k]->v;
    const auto& g = gs[k]->v;
    auto& m = ms[k]->v;
    auto& v = vs[k]->v;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
      v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.eps);
    }
  }
}

TrainState start_training(const Hyperparams& hyper, Vocabularies vocab) {
  TrainState st;
  st.rng.seed(hyper.seed);
  st.model.hyper = hyper;
  st.model.vocab = std::move(vocab);
  st.model.params = init_params(st.model.hyper, st.model.vocab, st.rng);
  st.adam.m = st.model.params.zeros_like();
  st.adam.v = st.model.params.zeros_like();
  return st;
}

void train_epochs(TrainState& st, const std::vector<Example>& data, int epochs, const EpochCallback& on_epoch) {
  if (data.empty()) throw Error(ErrorKind::InvalidArgument, "training set is empty");
  const auto& hyper = st.model.hyper;
  const auto d = static_cast<std::size_t>(hyper.d);
  const auto batch = static_cast<std::size_t>(hyper.batch);
  std::vector<std::size_t> order(data.size());
  std::vector<Example> chunk;
  std::vector<Vector> eps;

  for (int e = 0; e < epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(st.rng)]);
    }
    double sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      chunk.clear();
      eps.clear();
      for (std::size_t i = start; i < std::min(order.size(), start + batch); ++i) {
        chunk.push_back(data[order[i]]);
        // Draws happen only when dropout is on, so a run without it
        // consumes the generator exactly as before.
        if (hyper.label_dropout > 0.0 && std::bernoulli_distribution(hyper.label_dropout)(st.rng))
          chunk.back().label = drop_elements(chunk.back().label, st.rng);
        eps.push_back(draw_standard_normal(d, st.rng));
      }
      GedParams grad = st.model.params.zeros_like();
      double l = loss_and_grad(st.model.params, hyper, chunk, eps, &grad);
      sum += l * static_cast<double>(chunk.size());
      adam_update(st.model.params, grad, st.adam, hyper.lr);
    }
    double mean = sum / static_cast<double>(data.size());
    st.epoch_loss.push_back(mean);
    ++st.epochs_done;
    if (on_epoch) on_epoch(st.epochs_done, mean);
  }
}

TrainState train(const std::vector<Example>& data, const Hyperparams& hyper, Vocabularies vocab,
                 const EpochCallback& on_epoch) {
  auto st = start_training(hyper, std::move(vocab));
  train_epochs(st, data, hyper.epochs, on_epoch);
  return st;
}

}  // namespace sketchgen
