#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sketchgen/metrics.hpp"
#include "sketchgen/type_check.hpp"

using namespace sketchgen;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Io;
}

std::size_t count_calls(const Exp& e) {
  if (std::holds_alternative<Call>(e.node)) return 1;
  if (const auto* l = std::get_if<LetExp>(&e.node)) return 1 + count_calls(*l->body);
  return 0;
}

std::size_t count_calls(const ProgramPtr& p) {
  return std::visit(
      [](const auto& n) -> std::size_t {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, ast::Seq>) return count_calls(n.first) + count_calls(n.second);
        else if constexpr (std::is_same_v<T, ast::CallStmt> || std::is_same_v<T, ast::Let>) return 1;
        else if constexpr (std::is_same_v<T, ast::If>)
          return count_calls(n.cond) + count_calls(n.then_branch) + count_calls(n.else_branch);
        else if constexpr (std::is_same_v<T, ast::While>) return count_calls(n.cond) + count_calls(n.body);
        else if constexpr (std::is_same_v<T, ast::Try>) {
          std::size_t k = count_calls(n.body);
          for (const auto& c : n.catches) k += count_calls(c.body);
          return k;
        } else return 0;
      },
      p->node);
}

}  // namespace

TEST(ApiDatabase, ReaderSignatures) {
  auto db = ApiDatabase::parse(R"({
    "types": ["String", "FileReader", "BufferedReader"],
    "methods": [
      {"receiver": "FileReader", "name": "new", "params": ["String"], "returns": "FileReader"},
      {"receiver": "BufferedReader", "name": "readLine", "params": [], "returns": "String"}]})");
  EXPECT_EQ(db.methods().size(), 2u);
  EXPECT_TRUE(db.has_type("FileReader"));
  EXPECT_TRUE(db.has_type("BufferedReader"));
  std::vector<TypeName> none;
  auto r = db.resolve("BufferedReader", "readLine", none);
  ASSERT_TRUE(r);
  EXPECT_EQ(r.signature->returns, std::optional<TypeName>("String"));
  std::vector<TypeName> str{"String"};
  auto ctor = db.resolve("FileReader", "new", str);
  ASSERT_TRUE(ctor);
  EXPECT_TRUE(ctor.signature->is_constructor());
  EXPECT_EQ(ctor.signature->key(), "FileReader.new(String)");
}

TEST(ApiDatabase, EmptyTypesListIsValid) {
  auto db = ApiDatabase::parse(R"({"types": []})");
  EXPECT_TRUE(db.types().empty());
  EXPECT_TRUE(db.methods().empty());
}

TEST(ApiDatabase, RejectsUndeclaredType) {
  EXPECT_EQ(kind_of([] {
              ApiDatabase::parse(R"({"types": ["A"], "methods": [{"receiver": "A", "name": "m", "params": ["Foo"]}]})");
            }),
            ErrorKind::UnknownType);
}

TEST(ApiDatabase, RejectsDuplicateSignature) {
  EXPECT_EQ(kind_of([] {
              ApiDatabase::parse(R"({"types": ["A"], "methods": [
                {"receiver": "A", "name": "m", "params": []},
                {"receiver": "A", "name": "m", "params": [], "returns": "A"}]})");
            }),
            ErrorKind::DuplicateSignature);
}

TEST(ApiDatabase, ParseErrorReportsPosition) {
  try {
    ApiDatabase::parse("{\n  \"types\": [\"A\",, ]\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ApiDatabase, ConstructorMustReturnReceiver) {
  EXPECT_EQ(kind_of([] {
              ApiDatabase::parse(R"({"types": ["A", "B"], "methods": [{"receiver": "A", "name": "new", "returns": "B"}]})");
            }),
            ErrorKind::InvalidDatabase);
}

TEST(ApiDatabase, SubtypingIsReflexiveTransitiveAndAcyclic) {
  auto db = oracle::toy_db();
  EXPECT_TRUE(db.is_subtype("IOException", "IOException"));
  EXPECT_TRUE(db.is_subtype("FileNotFoundException", "Throwable"));
  EXPECT_FALSE(db.is_subtype("Throwable", "IOException"));
  EXPECT_EQ(kind_of([] {
              ApiDatabase::parse(R"({"types": ["A", "B"], "subtypes": [{"sub": "A", "super": "B"}, {"sub": "B", "super": "A"}]})");
            }),
            ErrorKind::InvalidDatabase);
}

TEST(ApiDatabase, ToyDatabaseLoads) {
  auto db = oracle::toy_db();
  EXPECT_EQ(db.package_of("BufferedReader"), "java.io");
  EXPECT_EQ(db.package_of("Camera"), "android.hardware");
  EXPECT_NE(db.find_exact("BufferedReader.readLine()"), nullptr);
}

TEST(Parser, Skip) {
  auto p = parse_program("skip");
  EXPECT_TRUE(std::holds_alternative<ast::Skip>(p->node));
}

TEST(Parser, ReadLinesProgram) {
  auto p = parse_program(oracle::kReadLinesText);
  const auto* t = std::get_if<ast::Try>(&p->node);
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->catches.size(), 2u);
  EXPECT_EQ(t->catches[0].type, "FileNotFoundException");
  EXPECT_EQ(t->catches[1].type, "IOException");
  auto body = flatten_seq(t->body);
  ASSERT_EQ(body.size(), 4u);
  EXPECT_TRUE(std::holds_alternative<ast::While>(body[2]->node));
}

TEST(Parser, TruncatedLetIsSyntaxError) {
  try {
    parse_program("let x = ");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Syntax);
    EXPECT_NE(std::string(e.what()).find("column"), std::string::npos);
  }
}

TEST(Parser, RejectsReservedBinder) {
  EXPECT_EQ(kind_of([] { parse_program("let while = $A.m()"); }), ErrorKind::Syntax);
}

TEST(Parser, CommentsAndLayoutAreIgnored) {
  auto a = parse_program("call $A.m(); // trailing\n  skip");
  auto b = parse_program("call $A.m(); skip");
  EXPECT_TRUE(same_program(a, b));
}

TEST(Printer, SkipAndSeq) {
  EXPECT_EQ(print_program(make_skip()), "skip");
  EXPECT_EQ(print_program(make_seq(make_skip(), make_skip())), "skip; skip");
}

TEST(Printer, RoundTripsRandomPrograms) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    auto p = oracle::random_program(rng, 4);
    auto text = print_program(p);
    auto back = parse_program(text);
    ASSERT_TRUE(same_program(p, back)) << text << "\nreparsed as\n" << print_program(back);
    ASSERT_TRUE(same_program(p, parse_program(pretty_print(p)))) << pretty_print(p);
  }
}

TEST(Printer, LeftNestedSeqKeepsItsShape) {
  auto p = make_seq(make_seq(make_skip(), make_call(Call{Sexp::input("A"), "m", {}})), make_skip());
  EXPECT_TRUE(same_program(p, parse_program(print_program(p)))) << print_program(p);
}

TEST(TypeCheck, ReadLinesEnvironment) {
  auto db = oracle::java_io_db();
  auto typing = type_check(parse_program(oracle::kReadLinesText), db);
  const auto& env = typing.env;
  EXPECT_EQ(env.at("fr"), "FileReader");
  EXPECT_EQ(env.at("br"), "BufferedReader");
  EXPECT_EQ(env.at("s"), "String");
  EXPECT_EQ(env.at("$String"), "String");
  EXPECT_EQ(env.at("e1"), "FileNotFoundException");
  EXPECT_EQ(env.at("e2"), "IOException");
  EXPECT_EQ(env.size(), 6u);
}

TEST(TypeCheck, SkipHasEmptyEnvironment) {
  auto typing = type_check(make_skip(), oracle::java_io_db());
  EXPECT_TRUE(typing.env.empty());
  EXPECT_TRUE(typing.calls.empty());
}

TEST(TypeCheck, ErrorKinds) {
  auto db = oracle::java_io_db();
  auto check = [&](const char* text) { return kind_of([&] { type_check(parse_program(text), db); }); };
  EXPECT_EQ(check("call br.readLine()"), ErrorKind::UndeclaredVariable);
  EXPECT_EQ(check("call $BufferedReader.readAll()"), ErrorKind::NoMatchingSignature);
  EXPECT_EQ(check("call $BufferedReader.readLine($String)"), ErrorKind::ArityMismatch);
  EXPECT_EQ(check("let b = new BufferedReader($String)"), ErrorKind::TypeMismatch);
  EXPECT_EQ(check("let x = $BufferedReader.close()"), ErrorKind::TypeMismatch);
  EXPECT_EQ(check("let x = $BufferedReader.readLine(); let x = $BufferedReader.readLine()"),
            ErrorKind::DuplicateVariable);
  EXPECT_EQ(check("call $Socket.close()"), ErrorKind::UndeclaredVariable);
  EXPECT_EQ(check("while ($BufferedReader.close()) do { skip }"), ErrorKind::TypeMismatch);
}

TEST(TypeCheck, ErrorQuotesOffendingNode) {
  try {
    type_check(parse_program("skip; call br.readLine()"), oracle::java_io_db());
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("br.readLine()"), std::string::npos) << e.what();
  }
}

TEST(TypeCheck, BlocksCloseTheirScope) {
  auto db = oracle::java_io_db();
  EXPECT_EQ(kind_of([&] {
              type_check(parse_program("if ($BufferedReader.readLine()) then { let s = $BufferedReader.readLine() } "
                                       "else { skip }; call s.trim()"),
                         db);
            }),
            ErrorKind::UndeclaredVariable);
  EXPECT_EQ(kind_of([&] {
              type_check(parse_program("while (let s = $BufferedReader.readLine(): s) do { skip }; "
                                       "let t = new FileReader(s)"),
                         db);
            }),
            ErrorKind::UndeclaredVariable);
}

TEST(TypeCheck, CatchMatchingUsesSubtyping) {
  auto db = oracle::java_io_db();
  auto typing = type_check(parse_program("try { skip } catch (e: FileNotFoundException) { call e.printStackTrace() }"), db);
  ASSERT_EQ(typing.calls.size(), 1u);
  const auto& ct = typing.calls.begin()->second;
  EXPECT_EQ(ct.signature->receiver, "Throwable");
  EXPECT_EQ(ct.receiver, "FileNotFoundException");
}

TEST(TypeCheck, EveryCallResolvedOnceAndDeterministically) {
  auto db = oracle::toy_db();
  auto data = std::ifstream(oracle::toy_corpus_path());
  std::string line;
  int programs = 0;
  while (std::getline(data, line)) {
    auto j = nlohmann::json::parse(line);
    auto p = parse_program(j.at("program").get<std::string>());
    auto a = type_check(p, db);
    auto b = type_check(p, db);
    ASSERT_EQ(a.calls.size(), count_calls(p)) << print_program(p);
    for (const auto& [call, typing] : a.calls) {
      ASSERT_NE(typing.signature, nullptr);
      EXPECT_EQ(typing.signature, b.calls.at(call).signature);
    }
    EXPECT_EQ(a.env, b.env);
    ++programs;
  }
  EXPECT_EQ(programs, 50);
}

TEST(TypeCheck, RenamingBindersPreservesOutcome) {
  auto db = oracle::java_io_db();
  const char* good = "let a = new FileReader($String); let b = new BufferedReader(a); call b.readLine()";
  const char* good2 = "let q = new FileReader($String); let r = new BufferedReader(q); call r.readLine()";
  const char* bad = "let a = new FileReader($String); call a.readLine()";
  const char* bad2 = "let z = new FileReader($String); call z.readLine()";
  EXPECT_NO_THROW(type_check(parse_program(good), db));
  EXPECT_NO_THROW(type_check(parse_program(good2), db));
  EXPECT_TRUE(alpha_equal(parse_program(good), parse_program(good2)));
  EXPECT_EQ(kind_of([&] { type_check(parse_program(bad), db); }),
            kind_of([&] { type_check(parse_program(bad2), db); }));
}
