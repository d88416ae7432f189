#pragma once

#include <array>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sketchgen/api_database.hpp"
#include "sketchgen/program.hpp"
#include "sketchgen/type_check.hpp"

namespace sketchgen {

/// Conditioning evidence: API call names, API types, and keywords.
struct Label {
  std::set<std::string> calls;
  std::set<std::string> types;
  std::set<std::string> keys;

  bool empty() const { return calls.empty() && types.empty() && keys.empty(); }
  std::size_t size() const { return calls.size() + types.size() + keys.size(); }
  bool operator==(const Label&) const = default;
};

enum class EvidenceKind { Calls = 0, Types = 1, Keys = 2 };
inline constexpr std::size_t kEvidenceKinds = 3;
std::string_view to_string(EvidenceKind kind);

const std::set<std::string>& elements(const Label& label, EvidenceKind kind);

/// Splits at lower→upper and letter↔digit boundaries and lowercases, so
/// "readLine" → {"read","line"} and "FileNotFoundException" →
/// {"file","not","found","exception"}.
std::vector<std::string> split_camel_case(std::string_view name);

Label extract_label(const ProgramPtr& program, const ApiDatabase& db);
Label extract_label(const ProgramPtr& program, const Typing& typing, const ApiDatabase& db);

/// Keeps ceil(fraction·|set|) uniformly chosen elements of each kind.
Label subsample_label(const Label& label, double fraction, std::mt19937_64& rng);

nlohmann::json label_to_json(const Label& label);
/// Missing keys are treated as empty. Throws MalformedRecord.
Label label_from_json(const nlohmann::json& j);

/// Dense string ↔ index map; indices are assigned in insertion order.
class IndexMap {
public:
  IndexMap() = default;
  explicit IndexMap(std::vector<std::string> items);

  int add(const std::string& item);
  std::optional<int> find(std::string_view item) const;
  const std::string& at(int index) const { return items_.at(static_cast<std::size_t>(index)); }
  std::size_t size() const { return items_.size(); }
  const std::vector<std::string>& items() const { return items_; }

  bool operator==(const IndexMap& other) const { return items_ == other.items_; }

private:
  std::vector<std::string> items_;
  std::map<std::string, int, std::less<>> index_;
};

/// One index map per evidence kind, plus the decoder's symbol set G.
struct Vocabularies {
  std::array<IndexMap, kEvidenceKinds> evidence;
  IndexMap symbols;

  const IndexMap& of(EvidenceKind kind) const { return evidence[static_cast<std::size_t>(kind)]; }
  IndexMap& of(EvidenceKind kind) { return evidence[static_cast<std::size_t>(kind)]; }

  bool operator==(const Vocabularies&) const = default;
};

/// Evidence elements sorted by name before indexing, so the result does not
/// depend on corpus order. Symbols always contain root and `<end>`.
Vocabularies build_vocabularies(const std::vector<Label>& labels,
                                const std::vector<std::vector<std::string>>& decoder_symbols);

nlohmann::json vocabularies_to_json(const Vocabularies& v);
Vocabularies vocabularies_from_json(const nlohmann::json& j);

/// Label mapped to vocabulary indices, per kind.
struct EncodedLabel {
  std::array<std::vector<int>, kEvidenceKinds> indices;

  std::size_t size() const;
};

/// Unknown elements are skipped and reported through `dropped` if given.
EncodedLabel encode_label(const Label& label, const Vocabularies& vocab,
                          std::vector<std::string>* dropped = nullptr);

}  // namespace sketchgen
