#include "sketchgen/concretizer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "sketchgen/metrics.hpp"

namespace sketchgen {

struct Site {
  enum class Kind { StmtCall, CondElem, EmptyCond };
  Kind kind;
  Cexp call;
  bool last = false;
  int scope = 0;
};

struct CatchVar {
  std::string name;
  TypeName type;
  int scope;
};

class CompiledSketch {
public:
  explicit CompiledSketch(Sketch s) : sketch(std::move(s)) {
    parent.push_back(-1);
    block(sketch.stmts, 0);
  }

  bool visible(int var_scope, int site_scope) const {
    for (int s = site_scope; s >= 0; s = parent[static_cast<std::size_t>(s)])
      if (s == var_scope) return true;
    return false;
  }

  ProgramPtr assemble(const std::vector<Decision>& decisions) const {
    std::size_t next = 0, next_catch = 0;
    return build_block(sketch.stmts, decisions, next, next_catch);
  }

  Sketch sketch;
  std::vector<Site> sites;
  std::vector<int> parent;
  std::vector<CatchVar> catch_vars;

private:
  int scope(int p) {
    parent.push_back(p);
    return static_cast<int>(parent.size()) - 1;
  }

  void block(const SketchBlock& b, int sc) {
    for (const auto& s : b) {
      switch (s.kind) {
        case SketchStmt::Kind::Skip: break;
        case SketchStmt::Kind::Call: sites.push_back(Site{Site::Kind::StmtCall, s.call, false, sc}); break;
        case SketchStmt::Kind::If:
          condition(s.cond, scope(sc));
          block(s.body, scope(sc));
          block(s.else_body, scope(sc));
          break;
        case SketchStmt::Kind::While:
          condition(s.cond, scope(sc));
          block(s.body, scope(sc));
          break;
        case SketchStmt::Kind::Try:
          block(s.body, scope(sc));
          for (const auto& c : s.catches) {
            if (!is_identifier(c.type)) throw Error(ErrorKind::MalformedRecord, "bad catch type '" + c.type + "'");
            int h = scope(sc);
            catch_vars.push_back(CatchVar{"e" + std::to_string(catch_vars.size() + 1), c.type, h});
            block(c.body, h);
          }
          break;
      }
    }
  }

  void condition(const std::vector<Cexp>& cond, int sc) {
    if (cond.empty()) sites.push_back(Site{Site::Kind::EmptyCond, {}, true, sc});
    for (std::size_t i = 0; i < cond.size(); ++i)
      sites.push_back(Site{Site::Kind::CondElem, cond[i], i + 1 == cond.size(), sc});
  }

  static Exp build_cond(const std::vector<const Decision*>& ds, std::size_t i) {
    const auto& d = *ds[i];
    switch (d.binding) {
      case Binding::Constant: return make_exp(Sexp::literal("true"));
      case Binding::Bare: return make_exp(*d.call);
      case Binding::LetReturn: return make_let_exp(d.var, *d.call, make_exp(Sexp::var(d.var)));
      default: return make_let_exp(d.var, *d.call, build_cond(ds, i + 1));
    }
  }

  Exp cond_exp(std::size_t n, const std::vector<Decision>& decisions, std::size_t& next) const {
    std::vector<const Decision*> ds;
    for (std::size_t i = 0; i < std::max<std::size_t>(n, 1); ++i) ds.push_back(&decisions.at(next++));
    return build_cond(ds, 0);
  }

  ProgramPtr build_block(const SketchBlock& b, const std::vector<Decision>& decisions, std::size_t& next,
                         std::size_t& next_catch) const {
    std::vector<ProgramPtr> out;
    for (const auto& s : b) {
      switch (s.kind) {
        case SketchStmt::Kind::Skip: out.push_back(make_skip()); break;
        case SketchStmt::Kind::Call: {
          const auto& d = decisions.at(next++);
          out.push_back(d.binding == Binding::Let ? make_let(d.var, *d.call) : make_call(*d.call));
          break;
        }
        case SketchStmt::Kind::If: {
          auto cond = cond_exp(s.cond.size(), decisions, next);
          auto a = build_block(s.body, decisions, next, next_catch);
          auto e = build_block(s.else_body, decisions, next, next_catch);
          out.push_back(make_if(std::move(cond), a, e));
          break;
        }
        case SketchStmt::Kind::While: {
          auto cond = cond_exp(s.cond.size(), decisions, next);
          out.push_back(make_while(std::move(cond), build_block(s.body, decisions, next, next_catch)));
          break;
        }
        case SketchStmt::Kind::Try: {
          auto body = build_block(s.body, decisions, next, next_catch);
          std::vector<Catch> catches;
          for (const auto& c : s.catches) {
            const auto& cv = catch_vars.at(next_catch++);
            catches.push_back(Catch{cv.name, c.type, build_block(c.body, decisions, next, next_catch)});
          }
          out.push_back(make_try(body, std::move(catches)));
          break;
        }
      }
    }
    return make_block(out);
  }
};

int WalkConfig::step_budget(const Sketch& sketch) const {
  return max_steps > 0 ? max_steps : 10 * static_cast<int>(node_count(sketch));
}

Pcs::Pcs(const Sketch& sketch) : compiled_(std::make_shared<const CompiledSketch>(sketch)) {
  for (const auto& c : compiled_->catch_vars) {
    vars_.push_back(Var{c.name, c.type, c.scope});
    taken_.insert(c.name);
  }
}

bool Pcs::concrete() const { return decisions_.size() == compiled_->sites.size(); }
std::size_t Pcs::sites() const { return compiled_->sites.size(); }
const Sketch& Pcs::sketch() const { return compiled_->sketch; }

ProgramPtr Pcs::program() const {
  if (!concrete()) throw Error(ErrorKind::InvalidArgument, "PCS still has abstract sites");
  return compiled_->assemble(decisions_);
}

Pcs Pcs::apply(Decision d, const std::optional<TypeName>& bound_type, std::vector<TypeName> new_inputs) const {
  Pcs next = *this;
  const auto& site = compiled_->sites[decisions_.size()];
  if (!d.var.empty()) {
    int scope = d.binding == Binding::LetReturn ? -1 : site.scope;
    next.vars_.push_back(Var{d.var, *bound_type, scope});
    next.taken_.insert(d.var);
    ++next.counters_[*bound_type];
  }
  next.inputs_.insert(new_inputs.begin(), new_inputs.end());
  next.cost_ += d.cost;
  next.decisions_.push_back(std::move(d));
  return next;
}

namespace {

std::string lower_first(const std::string& s) {
  std::string out = s;
  if (!out.empty()) out[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

std::vector<Pcs> Pcs::neighbors(const ApiDatabase& db) const {
  std::vector<Pcs> out;
  if (concrete()) return out;
  const auto& site = compiled_->sites[decisions_.size()];
  if (site.kind == Site::Kind::EmptyCond) {
    out.push_back(apply(Decision{std::nullopt, Binding::Constant, {}, 1.0}, std::nullopt, {}));
    return out;
  }

  const auto& c = site.call;
  auto res = db.resolve(c.receiver, c.method, c.params);
  if (!res) return out;
  const auto& sig = *res.signature;
  const auto& ret = sig.returns;

  std::vector<Binding> bindings;
  if (site.kind == Site::Kind::StmtCall) {
    bindings.push_back(Binding::Call);
    if (ret) bindings.push_back(Binding::Let);
  } else if (ret) {
    if (site.last) {
      bindings.push_back(Binding::Bare);
      bindings.push_back(Binding::LetReturn);
    } else {
      bindings.push_back(Binding::LetExp);
    }
  }
  if (bindings.empty()) return out;

  auto options = [&](const TypeName& type) {
    std::vector<Sexp> opts;
    for (const auto& v : vars_)
      if (v.type == type && v.scope >= 0 && compiled_->visible(v.scope, site.scope)) opts.push_back(Sexp::var(v.name));
    opts.push_back(Sexp::input(type));
    return opts;
  };

  // Receiver first, then one slot per argument.
  std::vector<std::vector<Sexp>> slots;
  slots.push_back(sig.is_constructor() ? std::vector<Sexp>{Sexp::klass(c.receiver)} : options(c.receiver));
  for (const auto& p : c.params) slots.push_back(options(p));

  std::string fresh;
  if (ret) {
    auto base = lower_first(*ret);
    auto it = counters_.find(*ret);
    int n = it == counters_.end() ? 0 : it->second;
    do fresh = base + std::to_string(++n);
    while (taken_.count(fresh));
  }

  std::vector<std::size_t> pick(slots.size(), 0);
  for (;;) {
    Call call{slots[0][pick[0]], c.method, {}};
    std::set<TypeName> new_inputs;
    if (call.receiver.kind == Sexp::Kind::Input && !inputs_.count(call.receiver.text))
      new_inputs.insert(call.receiver.text);
    for (std::size_t i = 1; i < slots.size(); ++i) {
      const auto& a = slots[i][pick[i]];
      call.args.push_back(a);
      if (a.kind == Sexp::Kind::Input && !inputs_.count(a.text)) new_inputs.insert(a.text);
    }
    for (auto b : bindings) {
      bool binds = b == Binding::Let || b == Binding::LetExp || b == Binding::LetReturn;
      double nodes = b == Binding::LetReturn ? 2.0 : 1.0;
      // A new `$T` is a fresh variable plus its implicit binding in the
      // environment.
      double cost = nodes + (binds ? 1.0 : 0.0) + 2.0 * static_cast<double>(new_inputs.size());
      out.push_back(apply(Decision{call, b, binds ? fresh : std::string{}, cost}, ret,
                          {new_inputs.begin(), new_inputs.end()}));
    }
    std::size_t i = slots.size();
    while (i > 0 && ++pick[i - 1] == slots[i - 1].size()) pick[--i] = 0;
    if (i == 0) break;
  }
  return out;
}

std::vector<Pcs> neighbors(const Pcs& h, const ApiDatabase& db) { return h.neighbors(db); }

std::vector<double> step_distribution(const std::vector<double>& costs, double bias) {
  if (costs.empty()) return {};
  double lo = *std::min_element(costs.begin(), costs.end());
  std::vector<double> w;
  double total = 0.0;
  for (double c : costs) {
    // Shifting by the cheapest cost keeps the weights in (0, 1]; the floor
    // stops very expensive steps from underflowing to probability zero.
    w.push_back(std::max(std::exp(-bias * (c - lo)), std::numeric_limits<double>::min()));
    total += w.back();
  }
  for (auto& x : w) x /= total;
  return w;
}

std::vector<double> step_distribution(const std::vector<Pcs>& candidates, const WalkConfig& cfg) {
  std::vector<double> costs;
  for (const auto& c : candidates) costs.push_back(c.last_cost());
  return step_distribution(costs, cfg.simplicity_bias);
}

WalkResult random_walk(const Sketch& sketch, const ApiDatabase& db, const WalkConfig& cfg, std::mt19937_64& rng) {
  const Pcs start(sketch);
  const int budget = cfg.step_budget(sketch);
  WalkResult result;
  for (int attempt = 0; attempt <= cfg.max_restarts; ++attempt) {
    ++result.walks;
    Pcs h = start;
    int steps = 0;
    while (!h.concrete() && steps < budget) {
      auto cands = h.neighbors(db);
      if (cands.empty()) break;
      auto probs = step_distribution(cands, cfg);
      double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      std::size_t i = 0;
      while (i + 1 < probs.size() && (u -= probs[i]) >= 0.0) ++i;
      h = std::move(cands[i]);
      ++steps;
    }
    result.steps = steps;
    if (h.concrete()) {
      result.program = h.program();
      result.cost = h.cost();
      return result;
    }
  }
  return result;
}

TopK concretize_top_k(const std::vector<Sketch>& sketches, const ApiDatabase& db, const WalkConfig& cfg,
                      std::size_t k, int walks_per_sample) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
  std::vector<std::pair<Sketch, int>> distinct;
  std::map<std::string, std::size_t> seen;
  for (const auto& s : sketches) {
    auto [it, fresh] = seen.emplace(sketch_to_record(s), distinct.size());
    if (fresh)
      distinct.emplace_back(s, 1);
    else
      ++distinct[it->second].second;
  }

  std::mt19937_64 rng(cfg.seed);
  std::map<std::string, RankedProgram> found;
  TopK out;
  for (const auto& [sketch, count] : distinct) {
    int walks = count * std::max(1, walks_per_sample);
    int ok = 0, tried = 0;
    std::vector<std::string> keys;
    for (; tried < walks; ++tried) {
      auto r = random_walk(sketch, db, cfg, rng);
      if (!r.ok()) {
        // A first walk that exhausts every restart marks the sketch as
        // likely unsatisfiable; further walks would fail the same way.
        if (ok == 0) {
          ++tried;
          break;
        }
        continue;
      }
      ++ok;
      auto key = canonical_text(r.program);
      auto [it, fresh] = found.try_emplace(key);
      auto& e = it->second;
      if (fresh) {
        e = RankedProgram{r.program, key, sketch, count, 0.0, 0, r.cost};
        keys.push_back(key);
      }
      ++e.hits;
    }
    if (ok == 0) out.failed.push_back(sketch);
    for (const auto& key : keys) found[key].success_rate = static_cast<double>(ok) / tried;
  }
  for (auto& [key, e] : found) out.programs.push_back(std::move(e));
  std::sort(out.programs.begin(), out.programs.end(), [](const RankedProgram& a, const RankedProgram& b) {
    if (a.sketch_count != b.sketch_count) return a.sketch_count > b.sketch_count;
    if (a.success_rate != b.success_rate) return a.success_rate > b.success_rate;
    if (a.cost != b.cost) return a.cost < b.cost;
    if (a.hits != b.hits) return a.hits > b.hits;
    return a.canonical < b.canonical;
  });
  if (out.programs.size() > k) out.programs.resize(k);
  return out;
}

}  // namespace sketchgen
