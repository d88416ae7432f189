#include <cctype>

#include "sketchgen/program.hpp"

namespace sketchgen {

namespace {

enum class Tok { Ident, Input, String, Int, Punct, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", pos_});
        return out;
      }
      std::size_t start = pos_;
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back({Tok::Ident, ident(), start});
      } else if (c == '$') {
        ++pos_;
        auto name = ident();
        if (name.empty()) fail(start, "expected a type name after '$'");
        out.push_back({Tok::Input, name, start});
      } else if (std::isdigit(static_cast<unsigned char>(c)) ||
                 (c == '-' && pos_ + 1 < src_.size() &&
                  std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
        ++pos_;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        out.push_back({Tok::Int, std::string(src_.substr(start, pos_ - start)), start});
      } else if (c == '"') {
        ++pos_;
        while (pos_ < src_.size() && src_[pos_] != '"') {
          if (src_[pos_] == '\\') ++pos_;
          ++pos_;
        }
        if (pos_ >= src_.size()) fail(start, "unterminated string literal");
        ++pos_;
        out.push_back({Tok::String, std::string(src_.substr(start, pos_ - start)), start});
      } else if (std::string_view(";(){},.=:").find(c) != std::string_view::npos) {
        ++pos_;
        out.push_back({Tok::Punct, std::string(1, c), start});
      } else {
        fail(start, std::string("unexpected character '") + c + "'");
      }
    }
  }

  [[noreturn]] void fail(std::size_t offset, const std::string& msg) const {
    auto p = position_of(src_, offset);
    throw Error(ErrorKind::Syntax, "line " + std::to_string(p.line) + ", column " +
                                       std::to_string(p.column) + ": " + msg);
  }

private:
  void skip_space() {
    while (pos_ < src_.size()) {
      if (std::isspace(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
      } else if (src_.substr(pos_, 2) == "//") {
        while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    return std::string(src_.substr(start, pos_ - start));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

class Parser {
public:
  explicit Parser(std::string_view src) : lexer_(src), toks_(lexer_.run()) {}

  ProgramPtr parse() {
    auto p = program();
    if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "' after program");
    return p;
  }

private:
  const Token& peek() const { return toks_[idx_]; }
  Token next() { return toks_[idx_ == toks_.size() - 1 ? idx_ : idx_++]; }

  bool at_punct(char c) const { return peek().kind == Tok::Punct && peek().text[0] == c; }
  bool at_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }

  [[noreturn]] void fail(const std::string& msg) const { lexer_.fail(peek().offset, msg); }

  std::string describe() const {
    return peek().kind == Tok::End ? "end of input" : "'" + peek().text + "'";
  }

  void expect_punct(char c) {
    if (!at_punct(c)) fail(std::string("expected '") + c + "' but found " + describe());
    next();
  }
  void expect_word(std::string_view w) {
    if (!at_word(w)) fail("expected '" + std::string(w) + "' but found " + describe());
    next();
  }

  std::string name() {
    if (peek().kind != Tok::Ident || is_reserved_word(peek().text))
      fail("expected a variable name but found " + describe());
    return next().text;
  }

  std::string type_name() {
    if (peek().kind != Tok::Ident || is_reserved_word(peek().text))
      fail("expected a type name but found " + describe());
    return next().text;
  }

  ProgramPtr program() {
    std::vector<ProgramPtr> stmts{statement()};
    while (at_punct(';')) {
      next();
      stmts.push_back(statement());
    }
    // Right-nested, but a grouped statement keeps its own nesting.
    return make_block(stmts);
  }

  ProgramPtr block() {
    expect_punct('{');
    if (at_punct('}')) {
      next();
      return make_skip();
    }
    auto p = program();
    expect_punct('}');
    return p;
  }

  ProgramPtr statement() {
    if (at_word("skip")) {
      next();
      return make_skip();
    }
    if (at_word("call")) {
      next();
      return make_call(call());
    }
    if (at_word("let")) {
      next();
      auto var = name();
      expect_punct('=');
      return make_let(std::move(var), call());
    }
    if (at_word("if")) {
      next();
      expect_punct('(');
      auto cond = exp();
      expect_punct(')');
      expect_word("then");
      auto then_branch = block();
      ProgramPtr else_branch = make_skip();
      if (at_word("else")) {
        next();
        else_branch = block();
      }
      return make_if(std::move(cond), then_branch, else_branch);
    }
    if (at_word("while")) {
      next();
      expect_punct('(');
      auto cond = exp();
      expect_punct(')');
      expect_word("do");
      return make_while(std::move(cond), block());
    }
    if (at_word("try")) {
      next();
      auto body = block();
      std::vector<Catch> catches;
      while (at_word("catch")) {
        next();
        expect_punct('(');
        auto var = name();
        expect_punct(':');
        auto type = type_name();
        expect_punct(')');
        catches.push_back(Catch{std::move(var), std::move(type), block()});
      }
      if (catches.empty()) fail("expected 'catch' after try block but found " + describe());
      return make_try(body, std::move(catches));
    }
    if (at_punct('{')) {
      next();
      auto p = program();
      expect_punct('}');
      return p;
    }
    fail("expected a statement but found " + describe());
  }

  Exp exp() {
    if (at_word("let")) {
      next();
      auto var = name();
      expect_punct('=');
      auto c = call();
      expect_punct(':');
      return make_let_exp(std::move(var), std::move(c), exp());
    }
    if (at_word("new")) return make_exp(call());
    auto s = sexp();
    if (at_punct('.')) return make_exp(method_call(std::move(s)));
    return make_exp(std::move(s));
  }

  Call call() {
    if (at_word("new")) {
      next();
      auto type = type_name();
      return Call{Sexp::klass(std::move(type)), std::string(kConstructorName), args()};
    }
    return method_call(sexp());
  }

  Call method_call(Sexp receiver) {
    expect_punct('.');
    if (peek().kind != Tok::Ident) fail("expected a method name but found " + describe());
    auto method = next().text;
    if (method == kConstructorName) fail("constructors are written 'new T(...)'");
    return Call{std::move(receiver), std::move(method), args()};
  }

  std::vector<Sexp> args() {
    expect_punct('(');
    std::vector<Sexp> out;
    if (at_punct(')')) {
      next();
      return out;
    }
    out.push_back(sexp());
    while (at_punct(',')) {
      next();
      out.push_back(sexp());
    }
    expect_punct(')');
    return out;
  }

  Sexp sexp() {
    const auto& t = peek();
    switch (t.kind) {
      case Tok::Input: return Sexp::input(next().text);
      case Tok::String:
      case Tok::Int: return Sexp::literal(next().text);
      case Tok::Ident:
        if (t.text == "true" || t.text == "false") return Sexp::literal(next().text);
        return Sexp::var(name());
      default: fail("expected a variable, input or constant but found " + describe());
    }
  }

  Lexer lexer_;
  std::vector<Token> toks_;
  std::size_t idx_ = 0;
};

}  // namespace

ProgramPtr parse_program(std::string_view text) { return Parser(text).parse(); }

}  // namespace sketchgen
