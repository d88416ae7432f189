#pragma once

#include <map>
#include <optional>
#include <string>

#include "sketchgen/api_database.hpp"
#include "sketchgen/program.hpp"

namespace sketchgen {

/// Variable name → type for every binder in a program plus every `$T`
/// environment input it reads (keyed as "$T").
using TypeEnvironment = std::map<std::string, TypeName>;

/// Result of a successful type check: the environment and the signature each
/// call node resolved to. Call pointers refer into the checked program, which
/// must outlive this object.
struct CallTyping {
  const MethodSignature* signature = nullptr;
  TypeName receiver;            // static type of the receiver expression
  std::vector<TypeName> args;   // static types of the arguments
};

struct Typing {
  TypeEnvironment env;
  std::map<const Call*, CallTyping> calls;

  const MethodSignature& signature_of(const Call& call) const;
  const CallTyping& typing_of(const Call& call) const;
};

/// Throws Error with kind UndeclaredVariable, DuplicateVariable,
/// NoMatchingSignature, ArityMismatch, TypeMismatch or UnknownType; the
/// message quotes the offending node.
Typing type_check(const ProgramPtr& program, const ApiDatabase& db);

/// Static type of a literal constant spelling ("String", "int", "boolean").
TypeName literal_type(std::string_view spelling);

}  // namespace sketchgen
