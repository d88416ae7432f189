#pragma once

// The Gaussian encoder-decoder: per-kind evidence encoders, the closed-form
// Normal posterior over the latent z, and a two-edge tree decoder over
// first-child/next-sibling sketch trees.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"
#include "sketchgen/labels.hpp"
#include "sketchgen/production_paths.hpp"
#include "sketchgen/sketch.hpp"
#include "sketchgen/tensor.hpp"

namespace sketchgen {

enum class Variant { Ged, Gsnn };

struct Hyperparams {
  int d = 16;
  std::array<int, kEvidenceKinds> enc_units{32, 16, 32};  // calls, types, keys
  int h_dec = 64;
  int batch = 16;
  double lr = 0.001;
  int epochs = 50;
  std::uint64_t seed = 1;
  Variant variant = Variant::Ged;
  double beta = 1.0;  // KL weight, GSNN only
  int max_nodes = 100;
  // Probability that a training example is seen with a random non-empty
  // subset of its label in an epoch. 0 trains on full labels only.
  double label_dropout = 0.0;

  /// Throws InvalidArgument.
  void validate() const;
  bool operator==(const Hyperparams&) const = default;
};

nlohmann::json hyperparams_to_json(const Hyperparams& h);
/// Keys absent from `j` keep the values already in `base`.
Hyperparams hyperparams_from_json(const nlohmann::json& j, Hyperparams base = {});

struct EncoderParams {
  Tensor Wh;         // |V_k| × h_k
  Tensor bh;         // 1 × h_k
  Tensor Wd;         // h_k × d
  Tensor bd;         // 1 × d
  Tensor log_sigma;  // 1 × 1
};

struct EdgeParams {
  Tensor Wh;  // h × h
  Tensor bh;  // 1 × h
  Tensor Wv;  // |G| × h
  Tensor bv;  // 1 × h
  Tensor Wy;  // h × |G|
  Tensor by;  // 1 × |G|
};

/// Every trainable tensor. Wlx lifts the posterior mean into the decoder's
/// initial state and is only read by the GSNN variant.
struct GedParams {
  std::array<EncoderParams, kEvidenceKinds> enc;
  std::array<EdgeParams, 2> edge;  // indexed by Edge
  Tensor Wl;   // d × h
  Tensor bl;   // 1 × h
  Tensor Wlx;  // d × h

  std::vector<Tensor*> tensors();
  std::vector<const Tensor*> tensors() const;
  GedParams zeros_like() const;
  std::size_t parameter_count() const;
  bool operator==(const GedParams& other) const;
};

struct Model {
  Hyperparams hyper;
  Vocabularies vocab;
  GedParams params;

  std::size_t symbols() const { return vocab.symbols.size(); }
};

/// Glorot-uniform weights, zero biases, log σ = 0. Wlx is drawn last so the
/// GED and GSNN variants consume the generator identically.
GedParams init_params(const Hyperparams& hyper, const Vocabularies& vocab, std::mt19937_64& rng);
Model make_model(const Hyperparams& hyper, Vocabularies vocab);

// Encoder and posterior.

/// tanh((Wh·onehot(x) + bh)·Wd + bd). Throws OutOfVocabulary.
Vector encode_element(const GedParams& p, EvidenceKind kind, int index);

struct Posterior {
  Vector mean;
  double variance = 1.0;  // covariance is variance·I
};

/// mean = X̄/(1+n), variance = 1/(1+n) with X̄ = Σ_k σ_k⁻² Σ_j f(x_kj) and
/// n = Σ_k n_k σ_k⁻².
Posterior posterior(const GedParams& p, const EncodedLabel& label);

/// mean + sqrt(variance)·eps
Vector reparameterize(const Posterior& post, std::span<const double> eps);
Vector draw_standard_normal(std::size_t d, std::mt19937_64& rng);
Vector sample_z(const Posterior& post, std::mt19937_64& rng);

/// KL(Normal(mean, v·I) ‖ Normal(0, I)).
double kl_to_prior(const Posterior& post);

// Decoder.

/// Decoder-form tree with symbols replaced by indices into G.
struct EncodedTree {
  std::vector<int> symbol;
  std::vector<int> child;
  std::vector<int> sibling;
};

/// Throws OutOfVocabulary for a symbol missing from G.
EncodedTree encode_tree(const DecoderTree& tree, const IndexMap& symbols);

struct StepOutput {
  Vector h;
  Vector y;
};

/// h = tanh(h_prev·Wh_e + bh_e + Wv_e[v] + bv_e), y = softmax(h·Wy_e + by_e).
StepOutput decoder_step(const GedParams& p, std::span<const double> h_prev, int symbol, Edge edge);

/// h0 = z·Wl + bl, plus mean·Wlx for GSNN.
Vector initial_state(const GedParams& p, Variant variant, std::span<const double> z,
                     std::span<const double> mean);

/// Σ log y[target] over every edge of the tree, visited depth-first with the
/// state after a node's child subtree feeding its sibling step.
double tree_log_prob(const GedParams& p, const EncodedTree& tree, std::span<const double> h0);

/// Same quantity from production paths (reassembled into a tree first).
double path_log_prob(const Model& m, const std::vector<ProductionPath>& paths, std::span<const double> z,
                     std::span<const double> mean);

// Training objective.

struct Example {
  EncodedLabel label;
  EncodedTree tree;
};

/// Mean over the batch of −log P(Y|z) (+ β·KL for GSNN) with
/// z = mean + sqrt(v)·eps[i]. Adds the gradient of that mean into `grad`
/// when given.
double loss_and_grad(const GedParams& p, const Hyperparams& hyper, std::span<const Example> batch,
                     std::span<const Vector> eps, GedParams* grad);

/// Draws eps from `rng` and evaluates the loss.
double loss(const GedParams& p, const Hyperparams& hyper, std::span<const Example> batch,
            std::mt19937_64& rng);

// Sampling.

struct SampleOptions {
  int max_nodes = 100;
  bool greedy = false;  // argmax instead of sampling
};

/// Grows a decoder-form tree depth-first, child before sibling, under the
/// grammar mask. Throws SizeBudgetExceeded when the tree outgrows max_nodes.
Sketch sample_sketch(const Model& m, std::span<const double> z, std::span<const double> mean,
                     std::mt19937_64& rng, const SampleOptions& opts);

}  // namespace sketchgen
