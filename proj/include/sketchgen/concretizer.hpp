#pragma once

// Type-directed random walks from a sketch to AML programs.
//
// A partially concretized sketch (PCS) is the sketch plus the decisions made
// so far for its abstract sites, taken leftmost first in pre-order. A site
// is an abstract call statement, one element of an abstract condition, or an
// empty condition. Deciding a call site picks a receiver and arguments (an
// in-scope variable of exactly the required type, or the `$T` input) and a
// binding form; constructors always use the class as receiver.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "sketchgen/api_database.hpp"
#include "sketchgen/program.hpp"
#include "sketchgen/sketch.hpp"

namespace sketchgen {

struct WalkConfig {
  int max_steps = 0;  // per walk; 0 means 10·node_count(sketch)
  int max_restarts = 50;
  double simplicity_bias = 1.0;
  std::uint64_t seed = 1;

  int step_budget(const Sketch& sketch) const;
};

class CompiledSketch;

/// How a call site's value is used.
enum class Binding {
  Call,        // statement `call c`
  Let,         // statement `let x = c`
  LetExp,      // condition element `let x = c: ...`
  Bare,        // final condition element `c`
  LetReturn,   // final condition element `let x = c: x`
  Constant,    // empty condition, `true`
};

struct Decision {
  std::optional<Call> call;
  Binding binding = Binding::Call;
  std::string var;  // binder for Let/LetExp/LetReturn
  double cost = 0.0;
};

class Pcs {
public:
  /// Throws MalformedRecord if a catch type is not an identifier.
  explicit Pcs(const Sketch& sketch);

  bool concrete() const;
  std::size_t decided() const { return decisions_.size(); }
  std::size_t sites() const;
  /// Sum of the costs of the decisions taken.
  double cost() const { return cost_; }
  /// Cost of the most recent decision (0 for the initial PCS).
  double last_cost() const { return decisions_.empty() ? 0.0 : decisions_.back().cost; }
  const std::vector<Decision>& decisions() const { return decisions_; }
  const Sketch& sketch() const;

  /// The program; requires concrete().
  ProgramPtr program() const;

  /// Every PCS reachable by deciding the leftmost open site. Empty when the
  /// PCS is concrete or stuck.
  std::vector<Pcs> neighbors(const ApiDatabase& db) const;

private:
  struct Var {
    std::string name;
    TypeName type;
    int scope;
  };

  Pcs apply(Decision d, const std::optional<TypeName>& bound_type, std::vector<TypeName> new_inputs) const;

  std::shared_ptr<const CompiledSketch> compiled_;
  std::vector<Decision> decisions_;
  std::vector<Var> vars_;
  std::set<TypeName> inputs_;
  std::set<std::string> taken_;
  std::map<TypeName, int> counters_;
  double cost_ = 0.0;
};

std::vector<Pcs> neighbors(const Pcs& h, const ApiDatabase& db);

/// weight ∝ exp(−bias·cost) of each candidate's last step, normalized.
std::vector<double> step_distribution(const std::vector<double>& costs, double simplicity_bias);
std::vector<double> step_distribution(const std::vector<Pcs>& candidates, const WalkConfig& cfg);

struct WalkResult {
  ProgramPtr program;  // null on failure
  double cost = 0.0;
  int walks = 0;       // walks started, including the successful one
  int steps = 0;       // steps of the final walk

  bool ok() const { return program != nullptr; }
};

/// Restarts from the sketch on a dead end or when a walk exceeds its step
/// budget; gives up after cfg.max_restarts restarts.
WalkResult random_walk(const Sketch& sketch, const ApiDatabase& db, const WalkConfig& cfg, std::mt19937_64& rng);

struct RankedProgram {
  ProgramPtr program;
  std::string canonical;
  Sketch sketch;
  int sketch_count = 0;       // times the sketch occurred in the input
  double success_rate = 0.0;  // fraction of the sketch's walks that succeeded
  int hits = 0;               // walks that produced this program
  double cost = 0.0;
};

struct TopK {
  std::vector<RankedProgram> programs;
  std::vector<Sketch> failed;  // distinct sketches whose walks all failed
};

/// Runs sketch_count × walks_per_sample walks per distinct sketch, merges
/// alpha-equivalent programs, and ranks by sketch count, then the sketch's
/// walk success rate, then program cost, then hits, then canonical text.
/// Uses cfg.seed.
TopK concretize_top_k(const std::vector<Sketch>& sketches, const ApiDatabase& db, const WalkConfig& cfg,
                      std::size_t k, int walks_per_sample = 1);

}  // namespace sketchgen
