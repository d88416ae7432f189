#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sketchgen {

enum class ErrorKind {
  Parse,
  Syntax,
  InvalidDatabase,
  DuplicateSignature,
  UnknownType,
  UndeclaredVariable,
  DuplicateVariable,
  NoMatchingSignature,
  ArityMismatch,
  TypeMismatch,
  Untypeable,
  MalformedRecord,
  OutOfVocabulary,
  SizeBudgetExceeded,
  PathExplosion,
  ShapeMismatch,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library. `kind()` lets callers and tests
/// distinguish failure classes without parsing messages.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

/// 1-based position inside a text document.
struct SourcePos {
  int line = 1;
  int column = 1;
};

SourcePos position_of(std::string_view text, std::size_t offset);

}  // namespace sketchgen
