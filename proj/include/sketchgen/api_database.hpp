#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sketchgen/error.hpp"

namespace sketchgen {

using TypeName = std::string;

inline constexpr std::string_view kConstructorName = "new";

/// (τ1,…,τk) → τ0 attached to a receiver type. Constructors are methods named
/// "new" whose return type is the receiver.
struct MethodSignature {
  TypeName receiver;
  std::string name;
  std::vector<TypeName> params;
  std::optional<TypeName> returns;  // nullopt means void

  bool is_constructor() const { return name == kConstructorName; }
  bool returns_value() const { return returns.has_value(); }

  /// "Receiver.name(P1,P2)": the same text an abstract call is printed with.
  std::string key() const;

  auto operator<=>(const MethodSignature&) const = default;
};

/// Outcome of looking a call up by static types.
struct Resolution {
  const MethodSignature* signature = nullptr;
  ErrorKind error = ErrorKind::NoMatchingSignature;
  std::string detail;

  explicit operator bool() const { return signature != nullptr; }
};

/// Universe of API types, method signatures and the declared subtyping
/// relation (reflexive-transitive closure of the declared edges).
class ApiDatabase {
public:
  ApiDatabase() = default;

  /// Parses the JSON database document; validates all invariants.
  static ApiDatabase parse(std::string_view text);

  void add_type(const TypeName& type, std::string package = {});
  void add_subtype(const TypeName& sub, const TypeName& super);
  void add_method(MethodSignature signature);

  /// Throws UnknownType / DuplicateSignature / InvalidDatabase.
  void validate() const;

  bool has_type(std::string_view type) const;
  const std::set<TypeName>& types() const { return types_; }
  const std::vector<MethodSignature>& methods() const { return methods_; }
  const std::string& package_of(std::string_view type) const;

  bool is_subtype(std::string_view sub, std::string_view super) const;

  /// Most specific signature named `name` callable on `receiver` with
  /// arguments of the given static types. Constructors are matched on the
  /// exact receiver type only.
  Resolution resolve(std::string_view receiver, std::string_view name,
                     std::span<const TypeName> args) const;

  const MethodSignature* find_exact(std::string_view key) const;

private:
  std::set<TypeName> types_;
  std::map<TypeName, std::string, std::less<>> packages_;
  std::map<TypeName, std::set<TypeName>, std::less<>> supertypes_;
  std::vector<MethodSignature> methods_;
  std::map<std::string, std::size_t, std::less<>> by_key_;
};

ApiDatabase load_api_database(const std::filesystem::path& path);

bool is_identifier(std::string_view text);
bool is_reserved_word(std::string_view text);

}  // namespace sketchgen
