#pragma once

// AST of the core API language: calls, lets, branches, loops, try/catch.
//
// Nodes are immutable and shared through `std::shared_ptr<const Program>`,
// so subtrees can be reused freely by the concretizer and the metrics.

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "sketchgen/api_database.hpp"

namespace sketchgen {

/// Simple expression: a variable, an environment input `$T`, a literal
/// constant, or (only as the receiver of `new`) a class reference.
struct Sexp {
  enum class Kind { Var, Input, Literal, Class };
  Kind kind = Kind::Var;
  std::string text;  // variable name, input type, literal spelling, or class name

  static Sexp var(std::string name) { return {Kind::Var, std::move(name)}; }
  static Sexp input(TypeName type) { return {Kind::Input, std::move(type)}; }
  static Sexp literal(std::string spelling) { return {Kind::Literal, std::move(spelling)}; }
  static Sexp klass(TypeName type) { return {Kind::Class, std::move(type)}; }

  bool operator==(const Sexp&) const = default;
};

struct Call {
  Sexp receiver;
  std::string method;
  std::vector<Sexp> args;

  bool is_constructor() const { return method == kConstructorName; }
  bool operator==(const Call&) const = default;
};

struct Exp;
using ExpPtr = std::shared_ptr<const Exp>;

/// `let var = call: body`
struct LetExp {
  std::string var;
  Call call;
  ExpPtr body;
};

struct Exp {
  std::variant<Sexp, Call, LetExp> node;
};

bool operator==(const Exp& a, const Exp& b);
bool operator==(const LetExp& a, const LetExp& b);

struct Program;
using ProgramPtr = std::shared_ptr<const Program>;

struct Catch {
  std::string var;
  TypeName type;
  ProgramPtr body;
};

namespace ast {
struct Skip {};
struct Seq {
  ProgramPtr first;
  ProgramPtr second;
};
struct CallStmt {
  Call call;
};
struct Let {
  std::string var;
  Call call;
};
struct If {
  Exp cond;
  ProgramPtr then_branch;
  ProgramPtr else_branch;
};
struct While {
  Exp cond;
  ProgramPtr body;
};
struct Try {
  ProgramPtr body;
  std::vector<Catch> catches;
};
}  // namespace ast

struct Program {
  std::variant<ast::Skip, ast::Seq, ast::CallStmt, ast::Let, ast::If, ast::While, ast::Try> node;
};

/// Deep structural equality (variable names included).
bool operator==(const Program& a, const Program& b);
bool same_program(const ProgramPtr& a, const ProgramPtr& b);

// Builders.
ProgramPtr make_skip();
ProgramPtr make_seq(ProgramPtr first, ProgramPtr second);
ProgramPtr make_call(Call call);
ProgramPtr make_let(std::string var, Call call);
ProgramPtr make_if(Exp cond, ProgramPtr then_branch, ProgramPtr else_branch);
ProgramPtr make_while(Exp cond, ProgramPtr body);
ProgramPtr make_try(ProgramPtr body, std::vector<Catch> catches);
/// Right-nested sequence of the statements; a single statement is returned
/// as is. Requires a non-empty list.
ProgramPtr make_block(const std::vector<ProgramPtr>& stmts);

Exp make_exp(Sexp s);
Exp make_exp(Call c);
Exp make_let_exp(std::string var, Call call, Exp body);

/// Canonical single-line text. parse_program(print_program(p)) == p.
std::string print_program(const Program& p);
std::string print_program(const ProgramPtr& p);
std::string print_exp(const Exp& e);
std::string print_call(const Call& c);

/// Indented multi-line rendering for humans; parses to the same AST.
std::string pretty_print(const ProgramPtr& p, int indent = 0);

/// Throws Error(Syntax) with line/column on malformed input.
ProgramPtr parse_program(std::string_view text);

/// Statements of a sequence, flattened left to right.
std::vector<ProgramPtr> flatten_seq(const ProgramPtr& p);

}  // namespace sketchgen
