#include "sketchgen/program.hpp"

namespace sketchgen {

bool operator==(const LetExp& a, const LetExp& b) {
  if (a.var != b.var || !(a.call == b.call)) return false;
  if (!a.body || !b.body) return a.body == b.body;
  return *a.body == *b.body;
}

bool operator==(const Exp& a, const Exp& b) { return a.node == b.node; }

namespace {

bool equal_catches(const std::vector<Catch>& a, const std::vector<Catch>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].var != b[i].var || a[i].type != b[i].type) return false;
    if (!same_program(a[i].body, b[i].body)) return false;
  }
  return true;
}

}  // namespace

bool same_program(const ProgramPtr& a, const ProgramPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const Program& a, const Program& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, ast::Skip>) {
          return true;
        } else if constexpr (std::is_same_v<T, ast::Seq>) {
          return same_program(x.first, y.first) && same_program(x.second, y.second);
        } else if constexpr (std::is_same_v<T, ast::CallStmt>) {
          return x.call == y.call;
        } else if constexpr (std::is_same_v<T, ast::Let>) {
          return x.var == y.var && x.call == y.call;
        } else if constexpr (std::is_same_v<T, ast::If>) {
          return x.cond == y.cond && same_program(x.then_branch, y.then_branch) &&
                 same_program(x.else_branch, y.else_branch);
        } else if constexpr (std::is_same_v<T, ast::While>) {
          return x.cond == y.cond && same_program(x.body, y.body);
        } else {
          return same_program(x.body, y.body) && equal_catches(x.catches, y.catches);
        }
      },
      a.node);
}

ProgramPtr make_skip() { return std::make_shared<const Program>(Program{ast::Skip{}}); }
ProgramPtr make_seq(ProgramPtr first, ProgramPtr second) {
  return std::make_shared<const Program>(Program{ast::Seq{std::move(first), std::move(second)}});
}
ProgramPtr make_call(Call call) {
  return std::make_shared<const Program>(Program{ast::CallStmt{std::move(call)}});
}
ProgramPtr make_let(std::string var, Call call) {
  return std::make_shared<const Program>(Program{ast::Let{std::move(var), std::move(call)}});
}
ProgramPtr make_if(Exp cond, ProgramPtr then_branch, ProgramPtr else_branch) {
  return std::make_shared<const Program>(
      Program{ast::If{std::move(cond), std::move(then_branch), std::move(else_branch)}});
}
ProgramPtr make_while(Exp cond, ProgramPtr body) {
  return std::make_shared<const Program>(Program{ast::While{std::move(cond), std::move(body)}});
}
ProgramPtr make_try(ProgramPtr body, std::vector<Catch> catches) {
  return std::make_shared<const Program>(Program{ast::Try{std::move(body), std::move(catches)}});
}

ProgramPtr make_block(const std::vector<ProgramPtr>& stmts) {
  if (stmts.empty()) throw Error(ErrorKind::InvalidArgument, "empty statement block");
  ProgramPtr acc = stmts.back();
  for (auto it = stmts.rbegin() + 1; it != stmts.rend(); ++it) acc = make_seq(*it, acc);
  return acc;
}

Exp make_exp(Sexp s) { return Exp{std::move(s)}; }
Exp make_exp(Call c) { return Exp{std::move(c)}; }
Exp make_let_exp(std::string var, Call call, Exp body) {
  return Exp{LetExp{std::move(var), std::move(call), std::make_shared<const Exp>(std::move(body))}};
}

std::vector<ProgramPtr> flatten_seq(const ProgramPtr& p) {
  std::vector<ProgramPtr> out;
  std::vector<ProgramPtr> stack{p};
  while (!stack.empty()) {
    auto cur = stack.back();
    stack.pop_back();
    if (auto* seq = std::get_if<ast::Seq>(&cur->node)) {
      stack.push_back(seq->second);
      stack.push_back(seq->first);
    } else {
      out.push_back(cur);
    }
  }
  return out;
}

namespace {

std::string print_sexp(const Sexp& s) {
  switch (s.kind) {
    case Sexp::Kind::Input: return "$" + s.text;
    default: return s.text;
  }
}

std::string print_args(const std::vector<Sexp>& args) {
  std::string out = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += print_sexp(args[i]);
  }
  return out + ")";
}

}  // namespace

std::string print_call(const Call& c) {
  if (c.receiver.kind == Sexp::Kind::Class && c.is_constructor())
    return "new " + c.receiver.text + print_args(c.args);
  return print_sexp(c.receiver) + "." + c.method + print_args(c.args);
}

std::string print_exp(const Exp& e) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Sexp>) {
          return print_sexp(x);
        } else if constexpr (std::is_same_v<T, Call>) {
          return print_call(x);
        } else {
          return "let " + x.var + " = " + print_call(x.call) + ": " + print_exp(*x.body);
        }
      },
      e.node);
}

std::string print_program(const ProgramPtr& p) { return print_program(*p); }

std::string print_program(const Program& p) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ast::Skip>) {
          return "skip";
        } else if constexpr (std::is_same_v<T, ast::Seq>) {
          std::string head = print_program(*x.first);
          if (std::holds_alternative<ast::Seq>(x.first->node)) head = "{ " + head + " }";
          return head + "; " + print_program(*x.second);
        } else if constexpr (std::is_same_v<T, ast::CallStmt>) {
          return "call " + print_call(x.call);
        } else if constexpr (std::is_same_v<T, ast::Let>) {
          return "let " + x.var + " = " + print_call(x.call);
        } else if constexpr (std::is_same_v<T, ast::If>) {
          return "if (" + print_exp(x.cond) + ") then { " + print_program(*x.then_branch) +
                 " } else { " + print_program(*x.else_branch) + " }";
        } else if constexpr (std::is_same_v<T, ast::While>) {
          return "while (" + print_exp(x.cond) + ") do { " + print_program(*x.body) + " }";
        } else {
          std::string out = "try { " + print_program(*x.body) + " }";
          for (const auto& c : x.catches)
            out += " catch (" + c.var + ": " + c.type + ") { " + print_program(*c.body) + " }";
          return out;
        }
      },
      p.node);
}

std::string pretty_print(const ProgramPtr& p, int indent) {
  std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (auto* seq = std::get_if<ast::Seq>(&p->node)) {
    if (std::holds_alternative<ast::Seq>(seq->first->node)) {
      return pad + "{\n" + pretty_print(seq->first, indent + 1) + "\n" + pad + "};\n" +
             pretty_print(seq->second, indent);
    }
    return pretty_print(seq->first, indent) + ";\n" + pretty_print(seq->second, indent);
  }
  auto block = [&](const ProgramPtr& body) {
    return "{\n" + pretty_print(body, indent + 1) + "\n" + pad + "}";
  };
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ast::If>) {
          return pad + "if (" + print_exp(x.cond) + ") then " + block(x.then_branch) + " else " +
                 block(x.else_branch);
        } else if constexpr (std::is_same_v<T, ast::While>) {
          return pad + "while (" + print_exp(x.cond) + ") do " + block(x.body);
        } else if constexpr (std::is_same_v<T, ast::Try>) {
          std::string out = pad + "try " + block(x.body);
          for (const auto& c : x.catches)
            out += " catch (" + c.var + ": " + c.type + ") " + block(c.body);
          return out;
        } else {
          return pad + print_program(*p);
        }
      },
      p->node);
}

}  // namespace sketchgen
