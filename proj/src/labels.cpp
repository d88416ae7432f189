#include "sketchgen/labels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace sketchgen {

using nlohmann::json;

std::string_view to_string(EvidenceKind kind) {
  switch (kind) {
    case EvidenceKind::Calls: return "calls";
    case EvidenceKind::Types: return "types";
    case EvidenceKind::Keys: return "keys";
  }
  return "?";
}

const std::set<std::string>& elements(const Label& label, EvidenceKind kind) {
  switch (kind) {
    case EvidenceKind::Calls: return label.calls;
    case EvidenceKind::Types: return label.types;
    case EvidenceKind::Keys: break;
  }
  return label.keys;
}

namespace {
std::set<std::string>& elements(Label& label, EvidenceKind kind) {
  return const_cast<std::set<std::string>&>(elements(std::as_const(label), kind));
}

bool is_lower(char c) { return std::islower(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::vector<std::string> split_camel_case(std::string_view name) {
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < name.size(); ++i) {
    char c = name[i];
    if (i > 0 && !cur.empty()) {
      char p = name[i - 1];
      bool boundary = (is_lower(p) && is_upper(c)) || (is_letter(p) && is_digit(c)) ||
                      (is_digit(p) && is_letter(c));
      if (boundary) out.push_back(std::exchange(cur, {}));
    }
    cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Label extract_label(const ProgramPtr& program, const ApiDatabase& db) {
  return extract_label(program, type_check(program, db), db);
}

Label extract_label(const ProgramPtr&, const Typing& typing, const ApiDatabase& db) {
  Label label;
  auto add_type = [&](const TypeName& t) {
    if (db.has_type(t)) label.types.insert(t);
  };
  for (const auto& [call, ct] : typing.calls) {
    label.calls.insert(ct.signature->name);
    add_type(ct.receiver);
    for (const auto& a : ct.args) add_type(a);
    if (ct.signature->returns) add_type(*ct.signature->returns);
  }
  for (const auto& [var, type] : typing.env) add_type(type);
  for (const auto& set : {label.calls, label.types})
    for (const auto& name : set)
      for (auto& k : split_camel_case(name)) label.keys.insert(std::move(k));
  return label;
}

Label subsample_label(const Label& label, double fraction, std::mt19937_64& rng) {
  fraction = std::clamp(fraction, 0.0, 1.0);
  Label out;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
    auto kind = static_cast<EvidenceKind>(k);
    std::vector<std::string> items(elements(label, kind).begin(), elements(label, kind).end());
    // The epsilon keeps e.g. 0.75·4 from rounding up to 4 through
    // floating-point noise.
    auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(items.size()) - 1e-9));
    // A full shuffle consumes the same draws whatever the fraction, so with
    // a fixed seed the subsets are nested as the fraction shrinks.
    for (std::size_t i = 0; i + 1 < items.size(); ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, items.size() - 1);
      std::swap(items[i], items[pick(rng)]);
    }
    elements(out, kind).insert(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(keep));
  }
  return out;
}

json label_to_json(const Label& label) {
  return json{{"calls", label.calls}, {"types", label.types}, {"keys", label.keys}};
}

Label label_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::MalformedRecord, "label must be an object");
  Label label;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
    auto kind = static_cast<EvidenceKind>(k);
    auto key = std::string(to_string(kind));
    if (!j.contains(key)) continue;
    const auto& arr = j.at(key);
    if (!arr.is_array()) throw Error(ErrorKind::MalformedRecord, "label." + key + " must be a list");
    for (const auto& e : arr) {
      if (!e.is_string()) throw Error(ErrorKind::MalformedRecord, "label." + key + " holds a non-string");
      elements(label, kind).insert(e.get<std::string>());
    }
  }
  return label;
}

IndexMap::IndexMap(std::vector<std::string> items) {
  for (const auto& s : items) add(s);
}

int IndexMap::add(const std::string& item) {
  if (auto it = index_.find(item); it != index_.end()) return it->second;
  int idx = static_cast<int>(items_.size());
  items_.push_back(item);
  index_.emplace(item, idx);
  return idx;
}

std::optional<int> IndexMap::find(std::string_view item) const {
  auto it = index_.find(item);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabularies build_vocabularies(const std::vector<Label>& labels,
                                const std::vector<std::vector<std::string>>& decoder_symbols) {
  Vocabularies v;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
    std::set<std::string> all;
    for (const auto& l : labels) {
      const auto& e = elements(l, static_cast<EvidenceKind>(k));
      all.insert(e.begin(), e.end());
    }
    for (const auto& s : all) v.evidence[k].add(s);
  }
  v.symbols.add("root");
  v.symbols.add("<end>");
  std::set<std::string> syms;
  for (const auto& list : decoder_symbols) syms.insert(list.begin(), list.end());
  for (const auto& s : syms) v.symbols.add(s);
  return v;
}

json vocabularies_to_json(const Vocabularies& v) {
  json j;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k)
    j[std::string(to_string(static_cast<EvidenceKind>(k)))] = v.evidence[k].items();
  j["symbols"] = v.symbols.items();
  return j;
}

Vocabularies vocabularies_from_json(const json& j) {
  Vocabularies v;
  try {
    for (std::size_t k = 0; k < kEvidenceKinds; ++k)
      v.evidence[k] = IndexMap(j.at(std::string(to_string(static_cast<EvidenceKind>(k))))
                                   .get<std::vector<std::string>>());
    v.symbols = IndexMap(j.at("symbols").get<std::vector<std::string>>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("vocabularies: ") + e.what());
  }
  return v;
}

std::size_t EncodedLabel::size() const {
  std::size_t n = 0;
  for (const auto& v : indices) n += v.size();
  return n;
}

EncodedLabel encode_label(const Label& label, const Vocabularies& vocab, std::vector<std::string>* dropped) {
  EncodedLabel out;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
    auto kind = static_cast<EvidenceKind>(k);
    for (const auto& e : elements(label, kind)) {
      if (auto idx = vocab.evidence[k].find(e))
        out.indices[k].push_back(*idx);
      else if (dropped)
        dropped->push_back(std::string(to_string(kind)) + ":" + e);
    }
  }
  return out;
}

}  // namespace sketchgen
