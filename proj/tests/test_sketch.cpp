#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "sketchgen/production_paths.hpp"
#include "sketchgen/sketch.hpp"

using namespace sketchgen;

namespace {

Sketch sketch_of(const char* text, const ApiDatabase& db) { return abstract(parse_program(text), db); }

using Pair = std::pair<std::string, char>;  // node, 'c' / 's' / '.'

std::vector<Pair> pairs(const ProductionPath& path) {
  std::vector<Pair> out;
  for (std::size_t i = 0; i < path.size(); ++i)
    out.emplace_back(path[i].node, i + 1 == path.size() ? '.' : path[i].edge == Edge::Child ? 'c' : 's');
  return out;
}

}  // namespace

TEST(Abstraction, CallOnVariableUsesItsStaticType) {
  auto s = sketch_of("let fr = new BufferedReader($FileReader); call fr.readLine()", oracle::java_io_db());
  ASSERT_EQ(s.stmts.size(), 2u);
  EXPECT_EQ(s.stmts[0], SketchStmt::abstract_call(Cexp::parse("BufferedReader.new(FileReader)")));
  EXPECT_EQ(s.stmts[1], SketchStmt::abstract_call(Cexp{"BufferedReader", "readLine", {}}));
}

TEST(Abstraction, SkipStaysSkip) {
  auto s = abstract(make_skip(), oracle::java_io_db());
  EXPECT_EQ(s, Sketch{});
  EXPECT_EQ(s.stmts, SketchBlock{SketchStmt::skip()});
}

TEST(Abstraction, LetChainsAppendInOrder) {
  auto db = oracle::java_io_db();
  auto one = sketch_of("while (let x = $BufferedReader.readLine(): x) do { skip }", db);
  EXPECT_EQ(one.stmts[0].cond, std::vector<Cexp>{Cexp::parse("BufferedReader.readLine()")});
  auto two = sketch_of("while (let x = $BufferedReader.readLine(): let y = new FileReader(x): y) do { skip }", db);
  EXPECT_EQ(two.stmts[0].cond,
            (std::vector<Cexp>{Cexp::parse("BufferedReader.readLine()"), Cexp::parse("FileReader.new(String)")}));
  auto constant = sketch_of("if (true) then { skip } else { skip }", db);
  EXPECT_TRUE(constant.stmts[0].cond.empty());
  auto variable = sketch_of("let s = $BufferedReader.readLine(); while (s) do { skip }", db);
  EXPECT_TRUE(variable.stmts[1].cond.empty());
}

TEST(Abstraction, CatchVariablesBecomeTypes) {
  auto s = sketch_of(oracle::kReadFileText, oracle::java_io_db());
  ASSERT_EQ(s.stmts.size(), 1u);
  const auto& t = s.stmts[0];
  ASSERT_EQ(t.kind, SketchStmt::Kind::Try);
  ASSERT_EQ(t.catches.size(), 2u);
  EXPECT_EQ(t.catches[0].type, "FileNotFoundException");
  EXPECT_EQ(t.catches[0].body[0].call.to_string(), "FileNotFoundException.printStackTrace()");
  EXPECT_EQ(t.catches[1].body[0].call.to_string(), "IOException.printStackTrace()");
}

TEST(Abstraction, IllTypedProgramIsRejected) {
  try {
    abstract(parse_program("call $BufferedReader.write()"), oracle::java_io_db());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Untypeable);
  }
}

TEST(Abstraction, NamesAndLetsDoNotMatter) {
  auto db = oracle::java_io_db();
  auto a = sketch_of("let r = new FileReader($String); call new BufferedReader(r)", db);
  auto b = sketch_of("call new FileReader($String); let q = new BufferedReader($FileReader)", db);
  EXPECT_EQ(a, b);
}

TEST(Abstraction, NodeCount) {
  auto s = sketch_of(oracle::kReadFileText, oracle::java_io_db());
  // try, 4 body statements, 1 condition element, skip, 2 catches, 2 handlers
  EXPECT_EQ(node_count(s), 11u);
  EXPECT_EQ(node_count(Sketch{}), 1u);
}

TEST(Cexp, ParseAndPrint) {
  auto c = Cexp::parse("Stream.copy(Reader,int)");
  EXPECT_EQ(c.receiver, "Stream");
  EXPECT_EQ(c.method, "copy");
  EXPECT_EQ(c.params, (std::vector<TypeName>{"Reader", "int"}));
  EXPECT_EQ(c.to_string(), "Stream.copy(Reader,int)");
  for (const char* bad : {"", "A.m", "A.(B)", "A.m(B", "A m()", ".m()"}) {
    EXPECT_THROW(Cexp::parse(bad), Error) << bad;
  }
}

TEST(ProductionPaths, ReadFileHasFourPaths) {
  // The four read-file paths, class names written out in full.
  // Handler calls carry the static type of the catch variable.
  auto paths = production_paths(sketch_of(oracle::kReadFileText, oracle::java_io_db()));
  std::vector<std::vector<Pair>> expected = {
      {{"root", 'c'}, {"try", 'c'}, {"FileReader.new(String)", 's'}, {"BufferedReader.new(FileReader)", 's'},
       {"while", 'c'}, {"BufferedReader.readLine()", 'c'}, {"skip", '.'}},
      {{"root", 'c'}, {"try", 'c'}, {"FileReader.new(String)", 's'}, {"BufferedReader.new(FileReader)", 's'},
       {"while", 's'}, {"BufferedReader.close()", '.'}},
      {{"root", 'c'}, {"try", 's'}, {"catch", 'c'}, {"FileNotFoundException", 'c'},
       {"FileNotFoundException.printStackTrace()", '.'}},
      {{"root", 'c'}, {"try", 's'}, {"catch", 's'}, {"catch", 'c'}, {"IOException", 'c'},
       {"IOException.printStackTrace()", '.'}},
  };
  ASSERT_EQ(paths.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(pairs(paths[i]), expected[i]) << "path " << i + 1;
  EXPECT_EQ(to_string(paths[1]),
            "(root,c), (try,c), (FileReader.new(String),s), (BufferedReader.new(FileReader),s), (while,s), "
            "(BufferedReader.close(),·)");
}

TEST(ProductionPaths, SkipHasOnePath) {
  auto paths = production_paths(Sketch{});
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(pairs(paths[0]), (std::vector<Pair>{{"root", 'c'}, {"skip", '.'}}));
}

TEST(ProductionPaths, DecoderFormMarksBlockEnds) {
  auto paths = decoder_paths(Sketch{});
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_EQ(pairs(paths[0]), (std::vector<Pair>{{"root", 'c'}, {"skip", 's'}, {"<end>", '.'}}));
  // A two-element condition: the first element gets an <end> child.
  auto db = oracle::java_io_db();
  auto s = sketch_of("while (let x = $BufferedReader.readLine(): let y = new FileReader(x): y) do { skip }", db);
  auto tree = build_tree(s, TreeForm::Decoder);
  const auto& w = tree.nodes[static_cast<std::size_t>(tree.root().child)];
  ASSERT_EQ(w.symbol, "while");
  const auto& first = tree.nodes[static_cast<std::size_t>(w.child)];
  EXPECT_EQ(tree.nodes[static_cast<std::size_t>(first.child)].symbol, "<end>");
  const auto& second = tree.nodes[static_cast<std::size_t>(first.sibling)];
  EXPECT_EQ(second.symbol, "FileReader.new(String)");
  EXPECT_EQ(tree.nodes[static_cast<std::size_t>(second.child)].symbol, "skip");
}

TEST(ProductionPaths, EmptyConditionUsesNoCondToken) {
  auto s = sketch_of("if (true) then { skip } else { call $BufferedReader.close() }", oracle::java_io_db());
  auto paths = production_paths(s);
  ASSERT_EQ(paths.size(), 2u);
  EXPECT_EQ(pairs(paths[0]), (std::vector<Pair>{{"root", 'c'}, {"if", 'c'}, {"<nocond>", 'c'}, {"skip", '.'}}));
  EXPECT_EQ(pairs(paths[1]),
            (std::vector<Pair>{{"root", 'c'}, {"if", 's'}, {"else", 'c'}, {"BufferedReader.close()", '.'}}));
}

TEST(ProductionPaths, ReassemblyReconstructsRandomSketches) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 300; ++i) {
    auto s = oracle::random_sketch(rng, 3);
    for (auto form : {TreeForm::Plain, TreeForm::Decoder}) {
      auto paths = form == TreeForm::Plain ? production_paths(s) : decoder_paths(s);
      auto tree = tree_from_paths(paths);
      ASSERT_EQ(tree, build_tree(s, form)) << to_text(s);
      ASSERT_EQ(tree_to_sketch(tree, form), s) << to_text(s);
      ASSERT_EQ(paths_of(tree).size(), paths.size());
    }
  }
}

TEST(ProductionPaths, RejectsInconsistentPaths) {
  std::vector<ProductionPath> bad = {{{"skip", Edge::Child}}};
  EXPECT_THROW(tree_from_paths(bad), Error);
  DecoderTree dangling{{TreeNode{"root", 5, -1}}};
  EXPECT_THROW(tree_to_sketch(dangling, TreeForm::Plain), Error);
  DecoderTree loop{{TreeNode{"root", 1, -1}, TreeNode{"skip", -1, 1}}};
  EXPECT_THROW(tree_to_sketch(loop, TreeForm::Plain), Error);
  DecoderTree no_end{{TreeNode{"root", 1, -1}, TreeNode{"skip", -1, -1}}};
  EXPECT_THROW(tree_to_sketch(no_end, TreeForm::Decoder), Error);
  EXPECT_NO_THROW(tree_to_sketch(no_end, TreeForm::Plain));
}

TEST(ProductionPaths, GrammarSlots) {
  EXPECT_TRUE(slot_allows(Slot::StmtFirst, SymbolKind::Call));
  EXPECT_FALSE(slot_allows(Slot::StmtFirst, SymbolKind::End));
  EXPECT_TRUE(slot_allows(Slot::StmtNext, SymbolKind::End));
  EXPECT_TRUE(slot_allows(Slot::CondFirst, SymbolKind::NoCond));
  EXPECT_FALSE(slot_allows(Slot::CondMore, SymbolKind::NoCond));
  EXPECT_TRUE(slot_allows(Slot::ExcType, SymbolKind::Type));
  EXPECT_EQ(symbol_kind("BufferedReader.readLine()"), SymbolKind::Call);
  EXPECT_EQ(symbol_kind("IOException"), SymbolKind::Type);
  EXPECT_EQ(symbol_kind("<end>"), SymbolKind::End);
}

TEST(SketchRecord, SkipRecord) {
  EXPECT_EQ(sketch_to_json(Sketch{}), nlohmann::json::parse(R"({"node":"skip"})"));
  EXPECT_EQ(record_to_sketch(R"({"node":"skip"})"), Sketch{});
}

TEST(SketchRecord, ReadFileRoundTrip) {
  auto s = sketch_of(oracle::kReadFileText, oracle::java_io_db());
  EXPECT_EQ(record_to_sketch(sketch_to_record(s)), s);
}

TEST(SketchRecord, RandomRoundTrip) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 300; ++i) {
    auto s = oracle::random_sketch(rng, 3);
    ASSERT_EQ(record_to_sketch(sketch_to_record(s)), s) << sketch_to_record(s);
  }
}

TEST(SketchRecord, MalformedRecordsAreRejected) {
  for (const char* bad : {R"({"node":"loop"})", R"({"node":"call"})", R"({"node":"call","call":"A.m("})",
                          R"({"node":"try","body":{"node":"skip"},"catches":[]})", R"([1,2])",
                          R"({"node":"seq","body":[]})", "not json"}) {
    try {
      record_to_sketch(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::MalformedRecord) << bad;
    }
  }
}
