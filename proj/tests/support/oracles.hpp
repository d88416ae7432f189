#pragma once

// Reference computations used by the unit and acceptance tests. Each one is
// written from the defining formula or by exhaustive search, without going
// through the code path it checks.

#include <filesystem>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sketchgen/api_database.hpp"
#include "sketchgen/labels.hpp"
#include "sketchgen/model.hpp"
#include "sketchgen/program.hpp"
#include "sketchgen/sketch.hpp"

namespace oracle {

using namespace sketchgen;

std::filesystem::path data_dir();
ApiDatabase toy_db();
std::filesystem::path toy_corpus_path();

/// Reads a file line by line, closes it, and has empty handlers.
extern const char* const kReadLinesText;
/// The same program with `printStackTrace` handlers, whose sketch is the
/// four-path read-file sketch.
extern const char* const kReadFileText;

/// Database holding just the java.io part needed by the reader examples.
ApiDatabase java_io_db();

/// Canonical texts of every type-safe concretization of `sketch` in the
/// concretizer's program space: call arguments and receivers are binders or
/// `$T` inputs, statements are `call` or `let`, conditions are let-chains
/// ending in the bare call or `let x = c: x`, and an empty condition is
/// `true`. Candidates are generated blindly and kept when they type check
/// and abstract back to `sketch`.
std::set<std::string> enumerate_concretizations(const Sketch& sketch, const ApiDatabase& db);

/// log of the unnormalized density Normal(z; 0, I)·Π_j Normal(f(x_j); z, σ_k²·I),
/// with f evaluated from the tensors by explicit loops.
double unnormalized_log_posterior(const GedParams& p, const EncodedLabel& label, const std::vector<double>& z);
/// log Normal(z; mean, v·I).
double log_normal(const std::vector<double>& z, const std::vector<double>& mean, double variance);

/// tanh((Wh[x] + bh)·Wd + bd) by explicit loops.
std::vector<double> encoder_by_hand(const GedParams& p, EvidenceKind kind, int index);

struct GradientCheck {
  std::string worst_tensor;
  std::size_t worst_entry = 0;
  double worst_error = 0.0;
  std::size_t entries = 0;
};
/// Central differences with step h on every parameter entry, compared with
/// `grad` by |a − n| / max(|a|, |n|, 1e-5).
GradientCheck check_gradients(const GedParams& p, const Hyperparams& hyper, const std::vector<Example>& batch,
                              const std::vector<Vector>& eps, double h = 1e-5);

/// Mean silhouette coefficient with Euclidean distance.
double silhouette(const std::vector<std::vector<double>>& points, const std::vector<std::string>& labels);

/// Random well-formed AST over a tiny vocabulary, for printer round trips.
ProgramPtr random_program(std::mt19937_64& rng, int depth = 3);
/// Random well-formed sketch over a tiny vocabulary.
Sketch random_sketch(std::mt19937_64& rng, int depth = 3);

}  // namespace oracle
