#include "sketchgen/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "sketchgen/type_check.hpp"

namespace sketchgen {

namespace {

class Renamer {
public:
  ProgramPtr program(const ProgramPtr& p) {
    std::vector<ProgramPtr> out;
    for (const auto& s : flatten_seq(p)) out.push_back(stmt(*s));
    return make_block(out);
  }

private:
  using Scope = std::map<std::string, std::string>;

  std::string fresh(const std::string& var) {
    auto name = "v" + std::to_string(next_++);
    scope_[var] = name;
    return name;
  }

  Sexp sexp(const Sexp& s) const {
    if (s.kind != Sexp::Kind::Var) return s;
    auto it = scope_.find(s.text);
    return it == scope_.end() ? s : Sexp::var(it->second);
  }

  Call call(const Call& c) const {
    Call out{sexp(c.receiver), c.method, {}};
    for (const auto& a : c.args) out.args.push_back(sexp(a));
    return out;
  }

  Exp exp(const Exp& e) {
    if (auto* s = std::get_if<Sexp>(&e.node)) return make_exp(sexp(*s));
    if (auto* c = std::get_if<Call>(&e.node)) return make_exp(call(*c));
    const auto& let = std::get<LetExp>(e.node);
    auto c = call(let.call);
    Scope saved = scope_;
    auto name = fresh(let.var);
    auto body = exp(*let.body);
    scope_ = std::move(saved);
    return make_let_exp(name, std::move(c), std::move(body));
  }

  ProgramPtr nested(const ProgramPtr& p) {
    Scope saved = scope_;
    auto out = program(p);
    scope_ = std::move(saved);
    return out;
  }

  ProgramPtr stmt(const Program& p) {
    return std::visit(
        [&](const auto& x) -> ProgramPtr {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ast::Skip>) {
            return make_skip();
          } else if constexpr (std::is_same_v<T, ast::Seq>) {
            return nullptr;  // flattened by the caller
          } else if constexpr (std::is_same_v<T, ast::CallStmt>) {
            return make_call(call(x.call));
          } else if constexpr (std::is_same_v<T, ast::Let>) {
            auto c = call(x.call);
            return make_let(fresh(x.var), std::move(c));
          } else if constexpr (std::is_same_v<T, ast::If>) {
            auto cond = exp(x.cond);
            auto a = nested(x.then_branch);
            auto b = nested(x.else_branch);
            return make_if(std::move(cond), a, b);
          } else if constexpr (std::is_same_v<T, ast::While>) {
            auto cond = exp(x.cond);
            return make_while(std::move(cond), nested(x.body));
          } else {
            auto body = nested(x.body);
            std::vector<Catch> catches;
            for (const auto& c : x.catches) {
              Scope saved = scope_;
              auto name = fresh(c.var);
              auto handler = program(c.body);
              scope_ = std::move(saved);
              catches.push_back(Catch{name, c.type, handler});
            }
            return make_try(body, std::move(catches));
          }
        },
        p.node);
  }

  Scope scope_;
  int next_ = 0;
};

using PathSet = std::set<CallSequence>;

class PathEnumerator {
public:
  PathEnumerator(const Typing& typing, int unroll, std::size_t cap) : typing_(typing), unroll_(unroll), cap_(cap) {}

  PathSet program(const Program& p) {
    return std::visit(
        [&](const auto& x) -> PathSet {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ast::Skip>) {
            return {{}};
          } else if constexpr (std::is_same_v<T, ast::Seq>) {
            return concat(program(*x.first), program(*x.second));
          } else if constexpr (std::is_same_v<T, ast::CallStmt> || std::is_same_v<T, ast::Let>) {
            return {{key(x.call)}};
          } else if constexpr (std::is_same_v<T, ast::If>) {
            auto c = exp(x.cond);
            auto out = concat(c, program(*x.then_branch));
            for (auto& s : concat(c, program(*x.else_branch))) out.insert(std::move(s));
            return checked(std::move(out));
          } else if constexpr (std::is_same_v<T, ast::While>) {
            auto c = exp(x.cond);
            auto round = concat(program(*x.body), c);
            PathSet out;
            PathSet cur = c;
            for (int k = 0;; ++k) {
              out.insert(cur.begin(), cur.end());
              checked(PathSet(out));
              if (k == unroll_) break;
              cur = concat(cur, round);
            }
            return checked(std::move(out));
          } else {
            auto body = program(*x.body);
            PathSet out = body;
            for (const auto& c : x.catches) {
              auto handler = program(*c.body);
              for (const auto& b : body)
                for (std::size_t len = 1; len <= b.size(); ++len) {
                  CallSequence prefix(b.begin(), b.begin() + static_cast<std::ptrdiff_t>(len));
                  for (const auto& h : handler) {
                    auto s = prefix;
                    s.insert(s.end(), h.begin(), h.end());
                    out.insert(std::move(s));
                  }
                  checked(PathSet(out));
                }
            }
            return checked(std::move(out));
          }
        },
        p.node);
  }

private:
  std::string key(const Call& c) const { return typing_.signature_of(c).key(); }

  PathSet exp(const Exp& e) {
    if (std::holds_alternative<Sexp>(e.node)) return {{}};
    if (auto* c = std::get_if<Call>(&e.node)) return {{key(*c)}};
    const auto& let = std::get<LetExp>(e.node);
    return concat({{key(let.call)}}, exp(*let.body));
  }

  PathSet concat(const PathSet& a, const PathSet& b) {
    PathSet out;
    for (const auto& x : a)
      for (const auto& y : b) {
        auto s = x;
        s.insert(s.end(), y.begin(), y.end());
        out.insert(std::move(s));
        if (out.size() > cap_) explode();
      }
    return out;
  }

  PathSet checked(PathSet s) const {
    if (s.size() > cap_) explode();
    return s;
  }

  [[noreturn]] void explode() const {
    throw Error(ErrorKind::PathExplosion, "more than " + std::to_string(cap_) + " control-flow paths");
  }

  const Typing& typing_;
  int unroll_;
  std::size_t cap_;
};

Typing typed(const ProgramPtr& p, const ApiDatabase& db) {
  try {
    return type_check(p, db);
  } catch (const Error& e) {
    throw Error(ErrorKind::Untypeable, e.what());
  }
}

template <class F>
void count_nodes(const Program& p, F&& visit) {
  visit(p);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ast::Seq>) {
          count_nodes(*x.first, visit);
          count_nodes(*x.second, visit);
        } else if constexpr (std::is_same_v<T, ast::If>) {
          count_nodes(*x.then_branch, visit);
          count_nodes(*x.else_branch, visit);
        } else if constexpr (std::is_same_v<T, ast::While>) {
          count_nodes(*x.body, visit);
        } else if constexpr (std::is_same_v<T, ast::Try>) {
          count_nodes(*x.body, visit);
          for (const auto& c : x.catches) count_nodes(*c.body, visit);
        }
      },
      p.node);
}

template <class F>
double best(const std::vector<ProgramPtr>& predicted, F&& distance) {
  double m = 1.0;
  bool any = false;
  for (const auto& p : predicted) {
    double d = distance(p);
    m = any ? std::min(m, d) : d;
    any = true;
  }
  return m;
}

}  // namespace

ProgramPtr alpha_canonical(const ProgramPtr& p) { return Renamer().program(p); }

std::string canonical_text(const ProgramPtr& p) { return print_program(alpha_canonical(p)); }

bool alpha_equal(const ProgramPtr& a, const ProgramPtr& b) {
  return same_program(alpha_canonical(a), alpha_canonical(b));
}

std::set<CallSequence> call_sequences(const ProgramPtr& p, const ApiDatabase& db, int unroll, std::size_t cap) {
  if (unroll < 0) throw Error(ErrorKind::InvalidArgument, "unroll must be non-negative");
  auto typing = typed(p, db);
  return PathEnumerator(typing, unroll, cap).program(*p);
}

std::set<std::string> call_set(const ProgramPtr& p, const ApiDatabase& db) {
  auto typing = typed(p, db);
  std::set<std::string> out;
  for (const auto& [call, ct] : typing.calls) out.insert(ct.signature->key());
  return out;
}

std::size_t statement_count(const ProgramPtr& p) {
  std::size_t n = 0;
  count_nodes(*p, [&](const Program& q) {
    n += std::holds_alternative<ast::Skip>(q.node) || std::holds_alternative<ast::CallStmt>(q.node) ||
         std::holds_alternative<ast::Let>(q.node);
  });
  return n;
}

std::size_t control_count(const ProgramPtr& p) {
  std::size_t n = 0;
  count_nodes(*p, [&](const Program& q) {
    n += std::holds_alternative<ast::If>(q.node) || std::holds_alternative<ast::While>(q.node) ||
         std::holds_alternative<ast::Try>(q.node);
  });
  return n;
}

double relative_difference(std::size_t expected, std::size_t predicted) {
  if (expected == 0) return predicted == 0 ? 0.0 : 1.0;
  auto diff = expected > predicted ? expected - predicted : predicted - expected;
  return static_cast<double>(diff) / static_cast<double>(expected);
}

double m1(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted) {
  auto canon = alpha_canonical(expected);
  for (const auto& p : predicted)
    if (same_program(canon, alpha_canonical(p))) return 1.0;
  return 0.0;
}

double m2(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted, const ApiDatabase& db) {
  auto e = call_sequences(expected, db);
  return best(predicted, [&](const ProgramPtr& p) { return jaccard_distance(e, call_sequences(p, db)); });
}

double m3(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted, const ApiDatabase& db) {
  auto e = call_set(expected, db);
  return best(predicted, [&](const ProgramPtr& p) { return jaccard_distance(e, call_set(p, db)); });
}

double m4(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted) {
  auto e = statement_count(expected);
  return best(predicted, [&](const ProgramPtr& p) { return relative_difference(e, statement_count(p)); });
}

double m5(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted) {
  auto e = control_count(expected);
  return best(predicted, [&](const ProgramPtr& p) { return relative_difference(e, control_count(p)); });
}

MetricScores score(const ProgramPtr& expected, const std::vector<ProgramPtr>& predicted, const ApiDatabase& db) {
  return MetricScores{{m1(expected, predicted), m2(expected, predicted, db), m3(expected, predicted, db),
                       m4(expected, predicted), m5(expected, predicted)}};
}

namespace {
std::string fmt(double x, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}
}  // namespace

std::string report_csv(const std::vector<ReportColumn>& columns) {
  std::ostringstream out;
  out << "metric";
  for (const auto& c : columns) out << "," << fmt(c.fraction * 100.0, 0) << "%";
  out << "\nrecords";
  for (const auto& c : columns) out << "," << c.records;
  out << '\n';
  for (std::size_t i = 0; i < 5; ++i) {
    out << "M" << i + 1;
    for (const auto& c : columns) out << "," << fmt(c.mean.m[i], 6);
    out << '\n';
  }
  return out.str();
}

std::string report_text(const std::vector<ReportColumn>& columns, const std::string& title) {
  static const char* names[5] = {"M1 alpha-equal in top-k", "M2 call-sequence Jaccard", "M3 call-set Jaccard",
                                 "M4 statement count", "M5 control structures"};
  auto cell = [](const std::string& s) { return std::string(s.size() < 9 ? 9 - s.size() : 0, ' ') + s; };
  auto head = [](const std::string& s) { return "  " + s + std::string(s.size() < 25 ? 25 - s.size() : 0, ' '); };
  std::ostringstream out;
  out << title << '\n' << head("observability");
  for (const auto& c : columns) out << cell(fmt(c.fraction * 100.0, 0) + "%");
  out << '\n' << head("records");
  for (const auto& c : columns) out << cell(std::to_string(c.records));
  out << '\n';
  for (std::size_t i = 0; i < 5; ++i) {
    out << head(names[i]);
    // A column with no records has no mean to show.
    for (const auto& c : columns) out << cell(c.records == 0 ? "-" : fmt(c.mean.m[i], 3));
    out << '\n';
  }
  return out.str();
}

}  // namespace sketchgen
