#include "sketchgen/type_check.hpp"

#include <set>

namespace sketchgen {

const CallTyping& Typing::typing_of(const Call& call) const {
  auto it = calls.find(&call);
  if (it == calls.end())
    throw Error(ErrorKind::InvalidArgument, "call " + print_call(call) + " was not type checked");
  return it->second;
}

const MethodSignature& Typing::signature_of(const Call& call) const {
  return *typing_of(call).signature;
}

TypeName literal_type(std::string_view spelling) {
  if (!spelling.empty() && spelling.front() == '"') return "String";
  if (spelling == "true" || spelling == "false") return "boolean";
  return "int";
}

namespace {

using Scope = std::map<std::string, TypeName>;

class Checker {
public:
  explicit Checker(const ApiDatabase& db) : db_(db) {}

  Typing run(const ProgramPtr& p) {
    Scope scope;
    stmt(*p, scope);
    return std::move(out_);
  }

private:
  [[noreturn]] static void fail(ErrorKind kind, const std::string& what, const std::string& node) {
    throw Error(kind, what + " in `" + node + "`");
  }

  void bind(const std::string& var, const TypeName& type, Scope& scope, const std::string& node) {
    if (!binders_.insert(var).second)
      fail(ErrorKind::DuplicateVariable, "variable '" + var + "' is bound twice", node);
    scope[var] = type;
    out_.env[var] = type;
  }

  TypeName sexp(const Sexp& s, const Scope& scope, const std::string& node) {
    switch (s.kind) {
      case Sexp::Kind::Var: {
        auto it = scope.find(s.text);
        if (it == scope.end())
          fail(ErrorKind::UndeclaredVariable, "variable '" + s.text + "' is not declared", node);
        return it->second;
      }
      case Sexp::Kind::Input:
        if (!db_.has_type(s.text))
          fail(ErrorKind::UndeclaredVariable, "'$" + s.text + "' names no API type", node);
        out_.env["$" + s.text] = s.text;
        return s.text;
      case Sexp::Kind::Literal:
        return literal_type(s.text);
      case Sexp::Kind::Class:
        break;
    }
    fail(ErrorKind::TypeMismatch, "class reference '" + s.text + "' outside a constructor", node);
  }

  std::optional<TypeName> call(const Call& c, const Scope& scope) {
    auto node = print_call(c);
    TypeName receiver;
    if (c.is_constructor()) {
      if (c.receiver.kind != Sexp::Kind::Class)
        fail(ErrorKind::TypeMismatch, "constructor called on a value", node);
      if (!db_.has_type(c.receiver.text))
        fail(ErrorKind::UnknownType, "type '" + c.receiver.text + "' is not declared", node);
      receiver = c.receiver.text;
    } else {
      receiver = sexp(c.receiver, scope, node);
    }
    std::vector<TypeName> args;
    args.reserve(c.args.size());
    for (const auto& a : c.args) args.push_back(sexp(a, scope, node));
    auto res = db_.resolve(receiver, c.method, args);
    if (!res) fail(res.error, res.detail, node);
    auto ret = res.signature->returns;
    out_.calls[&c] = CallTyping{res.signature, std::move(receiver), std::move(args)};
    return ret;
  }

  TypeName exp(const Exp& e, const Scope& scope) {
    auto node = print_exp(e);
    if (auto* s = std::get_if<Sexp>(&e.node)) return sexp(*s, scope, node);
    if (auto* c = std::get_if<Call>(&e.node)) {
      auto t = call(*c, scope);
      if (!t) fail(ErrorKind::TypeMismatch, "void call used as a value", node);
      return *t;
    }
    const auto& let = std::get<LetExp>(e.node);
    auto t = call(let.call, scope);
    if (!t) fail(ErrorKind::TypeMismatch, "void call bound to '" + let.var + "'", node);
    Scope inner = scope;
    bind(let.var, *t, inner, node);
    return exp(*let.body, inner);
  }

  void stmt(const Program& p, Scope& scope) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ast::Skip>) {
          } else if constexpr (std::is_same_v<T, ast::Seq>) {
            stmt(*x.first, scope);
            stmt(*x.second, scope);
          } else if constexpr (std::is_same_v<T, ast::CallStmt>) {
            call(x.call, scope);
          } else if constexpr (std::is_same_v<T, ast::Let>) {
            auto t = call(x.call, scope);
            if (!t)
              fail(ErrorKind::TypeMismatch, "void call bound to '" + x.var + "'", print_program(p));
            bind(x.var, *t, scope, print_program(p));
          } else if constexpr (std::is_same_v<T, ast::If>) {
            exp(x.cond, scope);
            Scope a = scope, b = scope;
            stmt(*x.then_branch, a);
            stmt(*x.else_branch, b);
          } else if constexpr (std::is_same_v<T, ast::While>) {
            exp(x.cond, scope);
            Scope body = scope;
            stmt(*x.body, body);
          } else {
            Scope body = scope;
            stmt(*x.body, body);
            for (const auto& c : x.catches) {
              if (!db_.has_type(c.type))
                fail(ErrorKind::UnknownType, "exception type '" + c.type + "' is not declared",
                     print_program(p));
              Scope handler = scope;
              bind(c.var, c.type, handler, print_program(p));
              stmt(*c.body, handler);
            }
          }
        },
        p.node);
  }

  const ApiDatabase& db_;
  Typing out_;
  std::set<std::string> binders_;
};

}  // namespace

Typing type_check(const ProgramPtr& program, const ApiDatabase& db) {
  return Checker(db).run(program);
}

}  // namespace sketchgen
