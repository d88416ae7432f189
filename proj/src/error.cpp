#include "sketchgen/error.hpp"

namespace sketchgen {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Syntax: return "syntax-error";
    case ErrorKind::InvalidDatabase: return "invalid-database";
    case ErrorKind::DuplicateSignature: return "duplicate-signature";
    case ErrorKind::UnknownType: return "unknown-type";
    case ErrorKind::UndeclaredVariable: return "undeclared-variable";
    case ErrorKind::DuplicateVariable: return "duplicate-variable";
    case ErrorKind::NoMatchingSignature: return "no-matching-signature";
    case ErrorKind::ArityMismatch: return "arity-mismatch";
    case ErrorKind::TypeMismatch: return "type-mismatch";
    case ErrorKind::Untypeable: return "untypeable-program";
    case ErrorKind::MalformedRecord: return "malformed-record";
    case ErrorKind::OutOfVocabulary: return "out-of-vocabulary";
    case ErrorKind::SizeBudgetExceeded: return "size-budget-exceeded";
    case ErrorKind::PathExplosion: return "path-explosion";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::Io: return "io-error";
  }
  return "unknown-error";
}

SourcePos position_of(std::string_view text, std::size_t offset) {
  SourcePos pos;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++pos.line;
      pos.column = 1;
    } else {
      ++pos.column;
    }
  }
  return pos;
}

}  // namespace sketchgen
