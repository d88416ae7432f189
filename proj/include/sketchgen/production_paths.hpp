#pragma once

// Sketches as first-child/next-sibling trees for the decoder, and the
// production paths read off those trees.
//
// Layout, for a statement block s1; s2; ...:
//   parent --child--> s1 --sibling--> s2 --sibling--> ...
// `try` takes its body as child and its catch clauses as siblings; a catch
// node's child is the exception type, whose child is the handler block.
// `if` and `while` take their condition list as child (elements chained by
// sibling edges; the last element's child is the body). An `if` is followed
// by an `else` sibling holding the else branch as its child. An empty
// condition list is the `<nocond>` token.
//
// The decoder form adds `<end>` leaves so that termination is observable:
// one after the last statement of every block, and one as the child of
// each condition element that is not the last.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sketchgen/sketch.hpp"

namespace sketchgen {

inline constexpr std::string_view kRootSymbol = "root";
inline constexpr std::string_view kEndSymbol = "<end>";
inline constexpr std::string_view kNoCondSymbol = "<nocond>";
inline constexpr std::string_view kSkipSymbol = "skip";
inline constexpr std::string_view kIfSymbol = "if";
inline constexpr std::string_view kElseSymbol = "else";
inline constexpr std::string_view kWhileSymbol = "while";
inline constexpr std::string_view kTrySymbol = "try";
inline constexpr std::string_view kCatchSymbol = "catch";

enum class Edge { Child, Sibling };

enum class TreeForm { Plain, Decoder };

struct TreeNode {
  std::string symbol;
  int child = -1;
  int sibling = -1;
};

/// nodes[0] is the synthetic root.
struct DecoderTree {
  std::vector<TreeNode> nodes;

  const TreeNode& root() const { return nodes.front(); }
  std::size_t size() const { return nodes.size(); }
  bool operator==(const DecoderTree& other) const;
};

struct PathStep {
  std::string node;
  Edge edge = Edge::Child;  // meaningless on the final step
};
using ProductionPath = std::vector<PathStep>;

DecoderTree build_tree(const Sketch& sketch, TreeForm form);

/// Root-to-leaf paths in depth-first order, child before sibling.
std::vector<ProductionPath> paths_of(const DecoderTree& tree);

/// Plain paths (no `<end>` markers).
std::vector<ProductionPath> production_paths(const Sketch& sketch);
/// Decoder-form paths.
std::vector<ProductionPath> decoder_paths(const Sketch& sketch);

/// Merges paths on shared prefixes. Throws MalformedRecord on paths that do
/// not start at the root or disagree about a node.
DecoderTree tree_from_paths(const std::vector<ProductionPath>& paths);

/// Inverse of build_tree for either form. Throws MalformedRecord.
Sketch tree_to_sketch(const DecoderTree& tree, TreeForm form);

/// "(try,c), (FR.new(String),s), ..., (skip,·)"; the root pair is included.
std::string to_string(const ProductionPath& path);

// Grammar of the decoder tree, used to mask sampling.

enum class SymbolKind { Root, End, NoCond, Skip, Call, If, Else, While, Try, Catch, Type };

SymbolKind symbol_kind(std::string_view symbol);

/// What may occupy a child or sibling position.
enum class Slot {
  None,
  StmtFirst,  // first statement of a block
  StmtNext,   // statement after another, or `<end>`
  CatchFirst,
  CatchNext,  // another catch, or the statement after the try
  Else,
  CondFirst,  // first condition element, or `<nocond>`
  CondChild,  // child of a condition element: body start, or `<end>` if more follow
  CondMore,   // subsequent condition element
  ExcType,
};

bool slot_allows(Slot slot, SymbolKind kind);

/// Slot for the child of a symbol of `kind` that was placed into `placed_in`.
Slot child_slot(Slot placed_in, SymbolKind kind);
/// Slot for its sibling; `child` is the kind of its child if it has one.
Slot sibling_slot(Slot placed_in, SymbolKind kind, std::optional<SymbolKind> child);

}  // namespace sketchgen
