#pragma once

// Sketches: programs with names and constants abstracted away. Control
// structure, abstract calls τ0.a(τ1,…,τk) and catch types remain.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sketchgen/api_database.hpp"
#include "sketchgen/program.hpp"
#include "sketchgen/type_check.hpp"

namespace sketchgen {

/// Abstract call τ0.a(τ1,…,τk), printed "Receiver.method(T1,T2)".
struct Cexp {
  TypeName receiver;
  std::string method;
  std::vector<TypeName> params;

  std::string to_string() const;
  /// Throws MalformedRecord.
  static Cexp parse(std::string_view text);

  auto operator<=>(const Cexp&) const = default;
};

struct SketchStmt;
/// Sequential composition is a flat, non-empty list of statements.
using SketchBlock = std::vector<SketchStmt>;

struct SketchCatch {
  TypeName type;
  SketchBlock body;

  bool operator==(const SketchCatch&) const = default;
};

struct SketchStmt {
  enum class Kind { Skip, Call, If, While, Try };

  Kind kind = Kind::Skip;
  Cexp call;                         // Call
  std::vector<Cexp> cond;            // If, While (possibly empty)
  SketchBlock body;                  // If: then branch; While: body; Try: body
  SketchBlock else_body;             // If
  std::vector<SketchCatch> catches;  // Try

  static SketchStmt skip() { return {}; }
  static SketchStmt abstract_call(Cexp c);
  static SketchStmt branch(std::vector<Cexp> cond, SketchBlock then_body, SketchBlock else_body);
  static SketchStmt loop(std::vector<Cexp> cond, SketchBlock body);
  static SketchStmt guarded(SketchBlock body, std::vector<SketchCatch> catches);

  bool operator==(const SketchStmt&) const = default;
};

struct Sketch {
  SketchBlock stmts{SketchStmt::skip()};

  bool operator==(const Sketch&) const = default;
};

/// The abstraction function. Type checks first; an ill-typed program throws
/// Error(Untypeable).
Sketch abstract(const ProgramPtr& program, const ApiDatabase& db);
Sketch abstract(const ProgramPtr& program, const Typing& typing);

/// Abstract expression of a condition: constants and variables give the empty
/// list, let-chains append.
std::vector<Cexp> abstract_exp(const Exp& e, const Typing& typing);

/// Number of sketch nodes (statements, condition elements, catch clauses).
std::size_t node_count(const Sketch& sketch);

/// Every abstract call in pre-order (statements and condition elements).
std::vector<Cexp> abstract_calls(const Sketch& sketch);

/// Readable one-line rendering, e.g. `try { FileReader.new(String); … } catch (IOException) { skip }`.
std::string to_text(const Sketch& sketch);

// Structured record: node tags skip, call, seq, if, while, try, catch.
nlohmann::json sketch_to_json(const Sketch& sketch);
Sketch sketch_from_json(const nlohmann::json& record);
std::string sketch_to_record(const Sketch& sketch);
/// Throws MalformedRecord.
Sketch record_to_sketch(std::string_view record);

}  // namespace sketchgen
