#include "sketchgen/api_database.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <deque>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace sketchgen {

namespace {

constexpr std::array<std::string_view, 15> kReserved = {
    "skip", "call", "let", "if", "then", "else", "while", "do",
    "try", "catch", "new", "true", "false", "void", "root"};

std::string join(const std::vector<TypeName>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

}  // namespace

bool is_identifier(std::string_view text) {
  if (text.empty()) return false;
  auto head = static_cast<unsigned char>(text.front());
  if (!std::isalpha(head) && text.front() != '_') return false;
  return std::all_of(text.begin(), text.end(), [](char c) {
    auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || c == '_';
  });
}

bool is_reserved_word(std::string_view text) {
  return std::find(kReserved.begin(), kReserved.end(), text) != kReserved.end();
}

std::string MethodSignature::key() const {
  return receiver + "." + name + "(" + join(params) + ")";
}

void ApiDatabase::add_type(const TypeName& type, std::string package) {
  if (!is_identifier(type) || is_reserved_word(type))
    throw Error(ErrorKind::InvalidDatabase, "invalid type name '" + type + "'");
  if (!types_.insert(type).second)
    throw Error(ErrorKind::InvalidDatabase, "type '" + type + "' declared twice");
  packages_[type] = std::move(package);
}

void ApiDatabase::add_subtype(const TypeName& sub, const TypeName& super) {
  supertypes_[sub].insert(super);
}

void ApiDatabase::add_method(MethodSignature signature) {
  if (!is_identifier(signature.name))
    throw Error(ErrorKind::InvalidDatabase, "invalid method name '" + signature.name + "'");
  auto key = signature.key();
  if (by_key_.count(key))
    throw Error(ErrorKind::DuplicateSignature, "signature " + key + " declared twice");
  by_key_.emplace(key, methods_.size());
  methods_.push_back(std::move(signature));
}

void ApiDatabase::validate() const {
  auto require = [&](const TypeName& t, const std::string& where) {
    if (!types_.count(t))
      throw Error(ErrorKind::UnknownType, "type '" + t + "' used in " + where + " is not declared");
  };
  for (const auto& m : methods_) {
    auto where = "signature " + m.key();
    require(m.receiver, where);
    for (const auto& p : m.params) require(p, where);
    if (m.returns) require(*m.returns, where);
    if (m.is_constructor() && m.returns != m.receiver)
      throw Error(ErrorKind::InvalidDatabase, "constructor " + m.key() + " must return its receiver");
  }
  for (const auto& [sub, supers] : supertypes_) {
    require(sub, "subtype declaration");
    for (const auto& s : supers) require(s, "subtype declaration");
  }
  // Antisymmetry: no two distinct types may be mutual subtypes.
  for (const auto& [sub, supers] : supertypes_) {
    for (const auto& s : supers) {
      if (s != sub && is_subtype(s, sub))
        throw Error(ErrorKind::InvalidDatabase,
                    "subtyping cycle between '" + sub + "' and '" + s + "'");
    }
  }
}

bool ApiDatabase::has_type(std::string_view type) const {
  return types_.find(TypeName(type)) != types_.end();
}

const std::string& ApiDatabase::package_of(std::string_view type) const {
  static const std::string empty;
  auto it = packages_.find(type);
  return it == packages_.end() ? empty : it->second;
}

bool ApiDatabase::is_subtype(std::string_view sub, std::string_view super) const {
  if (sub == super) return true;
  std::deque<std::string_view> frontier{sub};
  std::set<std::string_view> seen{sub};
  while (!frontier.empty()) {
    auto cur = frontier.front();
    frontier.pop_front();
    auto it = supertypes_.find(cur);
    if (it == supertypes_.end()) continue;
    for (const auto& next : it->second) {
      if (next == super) return true;
      if (seen.insert(next).second) frontier.push_back(next);
    }
  }
  return false;
}

Resolution ApiDatabase::resolve(std::string_view receiver, std::string_view name,
                                std::span<const TypeName> args) const {
  Resolution res;
  std::vector<const MethodSignature*> named;
  for (const auto& m : methods_) {
    if (m.name != name) continue;
    bool receiver_ok = m.is_constructor() ? m.receiver == receiver : is_subtype(receiver, m.receiver);
    if (receiver_ok) named.push_back(&m);
  }
  std::string call = std::string(receiver) + "." + std::string(name);
  if (named.empty()) {
    res.error = ErrorKind::NoMatchingSignature;
    res.detail = "no method " + call + " in the API database";
    return res;
  }
  std::vector<const MethodSignature*> arity;
  for (auto* m : named)
    if (m->params.size() == args.size()) arity.push_back(m);
  if (arity.empty()) {
    res.error = ErrorKind::ArityMismatch;
    res.detail = call + " does not take " + std::to_string(args.size()) + " argument(s)";
    return res;
  }
  std::vector<const MethodSignature*> typed;
  for (auto* m : arity) {
    bool ok = true;
    for (std::size_t i = 0; i < args.size() && ok; ++i) ok = is_subtype(args[i], m->params[i]);
    if (ok) typed.push_back(m);
  }
  std::string shown = call + "(" + join(std::vector<TypeName>(args.begin(), args.end())) + ")";
  if (typed.empty()) {
    res.error = ErrorKind::TypeMismatch;
    res.detail = "argument types of " + shown + " match no overload";
    return res;
  }
  auto more_specific = [&](const MethodSignature* a, const MethodSignature* b) {
    if (!is_subtype(a->receiver, b->receiver)) return false;
    for (std::size_t i = 0; i < a->params.size(); ++i)
      if (!is_subtype(a->params[i], b->params[i])) return false;
    return true;
  };
  for (auto* cand : typed) {
    bool best = std::all_of(typed.begin(), typed.end(),
                            [&](const MethodSignature* o) { return more_specific(cand, o); });
    if (best) {
      res.signature = cand;
      return res;
    }
  }
  res.error = ErrorKind::TypeMismatch;
  res.detail = "call " + shown + " is ambiguous";
  return res;
}

const MethodSignature* ApiDatabase::find_exact(std::string_view key) const {
  auto it = by_key_.find(key);
  return it == by_key_.end() ? nullptr : &methods_[it->second];
}

ApiDatabase ApiDatabase::parse(std::string_view text) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    auto offset = e.byte > 0 ? e.byte - 1 : 0;
    auto pos = position_of(text, offset);
    throw Error(ErrorKind::Parse, "line " + std::to_string(pos.line) + ", column " +
                                      std::to_string(pos.column) + ": " + e.what());
  }
  ApiDatabase db;
  try {
    if (!doc.is_object()) throw Error(ErrorKind::InvalidDatabase, "document must be an object");
    for (const auto& t : doc.value("types", json::array())) {
      if (t.is_string()) {
        db.add_type(t.get<std::string>());
      } else {
        db.add_type(t.at("name").get<std::string>(), t.value("package", std::string{}));
      }
    }
    for (const auto& s : doc.value("subtypes", json::array()))
      db.add_subtype(s.at("sub").get<std::string>(), s.at("super").get<std::string>());
    for (const auto& m : doc.value("methods", json::array())) {
      MethodSignature sig;
      sig.receiver = m.at("receiver").get<std::string>();
      sig.name = m.at("name").get<std::string>();
      sig.params = m.value("params", std::vector<std::string>{});
      auto ret = m.value("returns", std::string{"void"});
      if (ret != "void") sig.returns = ret;
      db.add_method(std::move(sig));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidDatabase, e.what());
  }
  db.validate();
  return db;
}

ApiDatabase load_api_database(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open API database " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ApiDatabase::parse(buf.str());
}

}  // namespace sketchgen
