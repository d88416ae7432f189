#include "sketchgen/sketch.hpp"

namespace sketchgen {

using nlohmann::json;

std::string Cexp::to_string() const {
  std::string out = receiver + "." + method + "(";
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (i) out += ",";
    out += params[i];
  }
  return out + ")";
}

Cexp Cexp::parse(std::string_view text) {
  auto bad = [&] { return Error(ErrorKind::MalformedRecord, "bad abstract call '" + std::string(text) + "'"); };
  auto dot = text.find('.');
  auto open = text.find('(');
  if (dot == std::string_view::npos || open == std::string_view::npos || open < dot ||
      text.back() != ')')
    throw bad();
  Cexp c;
  c.receiver = std::string(text.substr(0, dot));
  c.method = std::string(text.substr(dot + 1, open - dot - 1));
  if (!is_identifier(c.receiver) || !is_identifier(c.method)) throw bad();
  auto inner = text.substr(open + 1, text.size() - open - 2);
  while (!inner.empty()) {
    auto comma = inner.find(',');
    auto item = inner.substr(0, comma);
    if (!is_identifier(item)) throw bad();
    c.params.emplace_back(item);
    if (comma == std::string_view::npos) break;
    inner.remove_prefix(comma + 1);
    if (inner.empty()) throw bad();
  }
  return c;
}

SketchStmt SketchStmt::abstract_call(Cexp c) {
  SketchStmt s;
  s.kind = Kind::Call;
  s.call = std::move(c);
  return s;
}

SketchStmt SketchStmt::branch(std::vector<Cexp> cond, SketchBlock then_body, SketchBlock else_body) {
  SketchStmt s;
  s.kind = Kind::If;
  s.cond = std::move(cond);
  s.body = std::move(then_body);
  s.else_body = std::move(else_body);
  return s;
}

SketchStmt SketchStmt::loop(std::vector<Cexp> cond, SketchBlock body) {
  SketchStmt s;
  s.kind = Kind::While;
  s.cond = std::move(cond);
  s.body = std::move(body);
  return s;
}

SketchStmt SketchStmt::guarded(SketchBlock body, std::vector<SketchCatch> catches) {
  SketchStmt s;
  s.kind = Kind::Try;
  s.body = std::move(body);
  s.catches = std::move(catches);
  return s;
}

namespace {

Cexp abstract_call_node(const Call& c, const Typing& typing) {
  const auto& t = typing.typing_of(c);
  return Cexp{t.receiver, c.method, t.args};
}

void abstract_into(const Program& p, const Typing& typing, SketchBlock& out) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ast::Skip>) {
          out.push_back(SketchStmt::skip());
        } else if constexpr (std::is_same_v<T, ast::Seq>) {
          abstract_into(*x.first, typing, out);
          abstract_into(*x.second, typing, out);
        } else if constexpr (std::is_same_v<T, ast::CallStmt> || std::is_same_v<T, ast::Let>) {
          out.push_back(SketchStmt::abstract_call(abstract_call_node(x.call, typing)));
        } else if constexpr (std::is_same_v<T, ast::If>) {
          SketchBlock a, b;
          abstract_into(*x.then_branch, typing, a);
          abstract_into(*x.else_branch, typing, b);
          out.push_back(SketchStmt::branch(abstract_exp(x.cond, typing), std::move(a), std::move(b)));
        } else if constexpr (std::is_same_v<T, ast::While>) {
          SketchBlock body;
          abstract_into(*x.body, typing, body);
          out.push_back(SketchStmt::loop(abstract_exp(x.cond, typing), std::move(body)));
        } else {
          SketchBlock body;
          abstract_into(*x.body, typing, body);
          std::vector<SketchCatch> catches;
          for (const auto& c : x.catches) {
            SketchBlock handler;
            abstract_into(*c.body, typing, handler);
            catches.push_back(SketchCatch{c.type, std::move(handler)});
          }
          out.push_back(SketchStmt::guarded(std::move(body), std::move(catches)));
        }
      },
      p.node);
}

}  // namespace

std::vector<Cexp> abstract_exp(const Exp& e, const Typing& typing) {
  std::vector<Cexp> out;
  const Exp* cur = &e;
  for (;;) {
    if (std::holds_alternative<Sexp>(cur->node)) return out;
    if (auto* c = std::get_if<Call>(&cur->node)) {
      out.push_back(abstract_call_node(*c, typing));
      return out;
    }
    const auto& let = std::get<LetExp>(cur->node);
    out.push_back(abstract_call_node(let.call, typing));
    cur = let.body.get();
  }
}

Sketch abstract(const ProgramPtr& program, const Typing& typing) {
  Sketch s;
  s.stmts.clear();
  abstract_into(*program, typing, s.stmts);
  return s;
}

Sketch abstract(const ProgramPtr& program, const ApiDatabase& db) {
  Typing typing;
  try {
    typing = type_check(program, db);
  } catch (const Error& e) {
    throw Error(ErrorKind::Untypeable, e.what());
  }
  return abstract(program, typing);
}

namespace {

std::size_t count_block(const SketchBlock& b) {
  std::size_t n = 0;
  for (const auto& s : b) {
    n += 1 + s.cond.size() + count_block(s.body) + count_block(s.else_body);
    for (const auto& c : s.catches) n += 1 + count_block(c.body);
  }
  return n;
}

void calls_of(const SketchBlock& b, std::vector<Cexp>& out) {
  for (const auto& s : b) {
    if (s.kind == SketchStmt::Kind::Call) out.push_back(s.call);
    out.insert(out.end(), s.cond.begin(), s.cond.end());
    calls_of(s.body, out);
    calls_of(s.else_body, out);
    for (const auto& c : s.catches) calls_of(c.body, out);
  }
}

std::string cond_text(const std::vector<Cexp>& cond) {
  std::string out = "[";
  for (std::size_t i = 0; i < cond.size(); ++i) {
    if (i) out += ", ";
    out += cond[i].to_string();
  }
  return out + "]";
}

std::string block_text(const SketchBlock& b) {
  std::string out;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (i) out += "; ";
    const auto& s = b[i];
    switch (s.kind) {
      case SketchStmt::Kind::Skip: out += "skip"; break;
      case SketchStmt::Kind::Call: out += "call " + s.call.to_string(); break;
      case SketchStmt::Kind::If:
        out += "if " + cond_text(s.cond) + " then { " + block_text(s.body) + " } else { " +
               block_text(s.else_body) + " }";
        break;
      case SketchStmt::Kind::While:
        out += "while " + cond_text(s.cond) + " do { " + block_text(s.body) + " }";
        break;
      case SketchStmt::Kind::Try:
        out += "try { " + block_text(s.body) + " }";
        for (const auto& c : s.catches) out += " catch (" + c.type + ") { " + block_text(c.body) + " }";
        break;
    }
  }
  return out;
}

json cond_json(const std::vector<Cexp>& cond) {
  json arr = json::array();
  for (const auto& c : cond) arr.push_back(c.to_string());
  return arr;
}

json block_json(const SketchBlock& b);

json stmt_json(const SketchStmt& s) {
  switch (s.kind) {
    case SketchStmt::Kind::Skip: return json{{"node", "skip"}};
    case SketchStmt::Kind::Call: return json{{"node", "call"}, {"call", s.call.to_string()}};
    case SketchStmt::Kind::If:
      return json{{"node", "if"},
                  {"cond", cond_json(s.cond)},
                  {"then", block_json(s.body)},
                  {"else", block_json(s.else_body)}};
    case SketchStmt::Kind::While:
      return json{{"node", "while"}, {"cond", cond_json(s.cond)}, {"body", block_json(s.body)}};
    case SketchStmt::Kind::Try: {
      json catches = json::array();
      for (const auto& c : s.catches)
        catches.push_back(json{{"node", "catch"}, {"type", c.type}, {"body", block_json(c.body)}});
      return json{{"node", "try"}, {"body", block_json(s.body)}, {"catches", catches}};
    }
  }
  return {};
}

json block_json(const SketchBlock& b) {
  if (b.size() == 1) return stmt_json(b.front());
  json body = json::array();
  for (const auto& s : b) body.push_back(stmt_json(s));
  return json{{"node", "seq"}, {"body", body}};
}

[[noreturn]] void malformed(const std::string& msg) { throw Error(ErrorKind::MalformedRecord, msg); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) malformed(std::string("missing field '") + key + "'");
  return j.at(key);
}

std::vector<Cexp> cond_from(const json& j) {
  if (!j.is_array()) malformed("condition must be a list");
  std::vector<Cexp> out;
  for (const auto& c : j) {
    if (!c.is_string()) malformed("abstract call must be a string");
    out.push_back(Cexp::parse(c.get<std::string>()));
  }
  return out;
}

void block_from(const json& j, SketchBlock& out);

SketchBlock block_from(const json& j) {
  SketchBlock out;
  block_from(j, out);
  if (out.empty()) malformed("empty statement block");
  return out;
}

std::string type_from(const json& j) {
  if (!j.is_string() || !is_identifier(j.get<std::string>())) malformed("bad type name");
  return j.get<std::string>();
}

void block_from(const json& j, SketchBlock& out) {
  const auto& tag_j = field(j, "node");
  if (!tag_j.is_string()) malformed("node tag must be a string");
  auto tag = tag_j.get<std::string>();
  if (tag == "seq") {
    const auto& body = field(j, "body");
    if (!body.is_array()) malformed("seq body must be a list");
    for (const auto& s : body) block_from(s, out);
  } else if (tag == "skip") {
    out.push_back(SketchStmt::skip());
  } else if (tag == "call") {
    const auto& c = field(j, "call");
    if (!c.is_string()) malformed("abstract call must be a string");
    out.push_back(SketchStmt::abstract_call(Cexp::parse(c.get<std::string>())));
  } else if (tag == "if") {
    out.push_back(SketchStmt::branch(cond_from(field(j, "cond")), block_from(field(j, "then")),
                                     block_from(field(j, "else"))));
  } else if (tag == "while") {
    out.push_back(SketchStmt::loop(cond_from(field(j, "cond")), block_from(field(j, "body"))));
  } else if (tag == "try") {
    const auto& cs = field(j, "catches");
    if (!cs.is_array() || cs.empty()) malformed("try needs at least one catch");
    std::vector<SketchCatch> catches;
    for (const auto& c : cs) {
      if (field(c, "node") != "catch") malformed("expected a catch node");
      catches.push_back(SketchCatch{type_from(field(c, "type")), block_from(field(c, "body"))});
    }
    out.push_back(SketchStmt::guarded(block_from(field(j, "body")), std::move(catches)));
  } else {
    malformed("unknown node tag '" + tag + "'");
  }
}

}  // namespace

std::size_t node_count(const Sketch& sketch) { return count_block(sketch.stmts); }

std::vector<Cexp> abstract_calls(const Sketch& sketch) {
  std::vector<Cexp> out;
  calls_of(sketch.stmts, out);
  return out;
}

std::string to_text(const Sketch& sketch) { return block_text(sketch.stmts); }

json sketch_to_json(const Sketch& sketch) { return block_json(sketch.stmts); }

Sketch sketch_from_json(const json& record) {
  Sketch s;
  s.stmts = block_from(record);
  return s;
}

std::string sketch_to_record(const Sketch& sketch) { return sketch_to_json(sketch).dump(); }

Sketch record_to_sketch(std::string_view record) {
  json j;
  try {
    j = json::parse(record.begin(), record.end());
  } catch (const json::parse_error& e) {
    malformed(e.what());
  }
  return sketch_from_json(j);
}

}  // namespace sketchgen
