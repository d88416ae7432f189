#include "sketchgen/production_paths.hpp"

#include <functional>
#include <utility>

namespace sketchgen {

namespace {

[[noreturn]] void malformed(const std::string& msg) {
  throw Error(ErrorKind::MalformedRecord, "decoder tree: " + msg);
}

class TreeBuilder {
public:
  explicit TreeBuilder(TreeForm form) : form_(form) { add(std::string(kRootSymbol)); }

  DecoderTree finish(const Sketch& sketch) && {
    int first = block(sketch.stmts);
    tree_.nodes[0].child = first;
    return std::move(tree_);
  }

private:
  int add(std::string symbol) {
    tree_.nodes.push_back(TreeNode{std::move(symbol)});
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  TreeNode& at(int i) { return tree_.nodes[static_cast<std::size_t>(i)]; }

  int block(const SketchBlock& stmts) {
    int first = -1;
    int tail = -1;
    for (const auto& s : stmts) {
      auto [head, last] = statement(s);
      if (tail < 0)
        first = head;
      else
        at(tail).sibling = head;
      tail = last;
    }
    if (form_ == TreeForm::Decoder) {
      int end = add(std::string(kEndSymbol));
      if (tail < 0)
        first = end;
      else
        at(tail).sibling = end;
    }
    return first;
  }

  // Returns the statement's head node and the node whose sibling edge
  // continues the enclosing block.
  std::pair<int, int> statement(const SketchStmt& s) {
    switch (s.kind) {
      case SketchStmt::Kind::Skip: {
        int n = add(std::string(kSkipSymbol));
        return {n, n};
      }
      case SketchStmt::Kind::Call: {
        int n = add(s.call.to_string());
        return {n, n};
      }
      case SketchStmt::Kind::While: {
        int n = add(std::string(kWhileSymbol));
        int c = condition(s.cond, s.body);
        at(n).child = c;
        return {n, n};
      }
      case SketchStmt::Kind::If: {
        int n = add(std::string(kIfSymbol));
        int c = condition(s.cond, s.body);
        at(n).child = c;
        int e = add(std::string(kElseSymbol));
        at(n).sibling = e;
        int b = block(s.else_body);
        at(e).child = b;
        return {n, e};
      }
      case SketchStmt::Kind::Try: {
        int n = add(std::string(kTrySymbol));
        int b = block(s.body);
        at(n).child = b;
        int prev = n;
        for (const auto& c : s.catches) {
          int cn = add(std::string(kCatchSymbol));
          at(prev).sibling = cn;
          int t = add(c.type);
          at(cn).child = t;
          int h = block(c.body);
          at(t).child = h;
          prev = cn;
        }
        return {n, prev};
      }
    }
    return {-1, -1};
  }

  int condition(const std::vector<Cexp>& cond, const SketchBlock& body) {
    if (cond.empty()) {
      int n = add(std::string(kNoCondSymbol));
      int b = block(body);
      at(n).child = b;
      return n;
    }
    int first = -1;
    int prev = -1;
    for (std::size_t i = 0; i < cond.size(); ++i) {
      int n = add(cond[i].to_string());
      if (prev < 0)
        first = n;
      else
        at(prev).sibling = n;
      if (i + 1 == cond.size()) {
        int b = block(body);
        at(n).child = b;
      } else if (form_ == TreeForm::Decoder) {
        int end = add(std::string(kEndSymbol));
        at(n).child = end;
      }
      prev = n;
    }
    return first;
  }

  TreeForm form_;
  DecoderTree tree_;
};

class TreeReader {
public:
  TreeReader(const DecoderTree& tree, TreeForm form) : tree_(tree), form_(form) {}

  Sketch read() {
    if (tree_.nodes.empty() || tree_.root().symbol != kRootSymbol) malformed("missing root");
    if (tree_.root().sibling >= 0) malformed("root has a sibling");
    check_shape();
    Sketch s;
    s.stmts = block(tree_.root().child);
    return s;
  }

private:
  const TreeNode& at(int i) const {
    if (i < 0 || static_cast<std::size_t>(i) >= tree_.nodes.size()) malformed("dangling edge");
    return tree_.nodes[static_cast<std::size_t>(i)];
  }

  bool is_end(int i) const { return i >= 0 && at(i).symbol == kEndSymbol; }

  void expect_end(int i) const {
    if (form_ == TreeForm::Decoder) {
      if (!is_end(i)) malformed("missing <end>");
      const auto& n = at(i);
      if (n.child >= 0 || n.sibling >= 0) malformed("<end> has successors");
    } else if (i >= 0) {
      malformed("unexpected node '" + at(i).symbol + "' after block");
    }
  }

  SketchBlock block(int i) const {
    SketchBlock out;
    while (i >= 0 && !is_end(i)) i = statement(i, out);
    if (out.empty()) malformed("empty block");
    expect_end(i);
    return out;
  }

  void leaf(const TreeNode& n) const {
    if (n.child >= 0) malformed("'" + n.symbol + "' cannot have a child");
  }

  int statement(int i, SketchBlock& out) const {
    const auto& n = at(i);
    switch (symbol_kind(n.symbol)) {
      case SymbolKind::Skip:
        leaf(n);
        out.push_back(SketchStmt::skip());
        return n.sibling;
      case SymbolKind::Call:
        leaf(n);
        out.push_back(SketchStmt::abstract_call(Cexp::parse(n.symbol)));
        return n.sibling;
      case SymbolKind::While: {
        auto [cond, body] = condition(n.child);
        out.push_back(SketchStmt::loop(std::move(cond), std::move(body)));
        return n.sibling;
      }
      case SymbolKind::If: {
        auto [cond, then_body] = condition(n.child);
        if (n.sibling < 0 || at(n.sibling).symbol != kElseSymbol) malformed("if without else");
        const auto& e = at(n.sibling);
        out.push_back(SketchStmt::branch(std::move(cond), std::move(then_body), block(e.child)));
        return e.sibling;
      }
      case SymbolKind::Try: {
        auto body = block(n.child);
        std::vector<SketchCatch> catches;
        int c = n.sibling;
        while (c >= 0 && symbol_kind(at(c).symbol) == SymbolKind::Catch) {
          const auto& cn = at(c);
          if (cn.child < 0) malformed("catch without type");
          const auto& t = at(cn.child);
          if (symbol_kind(t.symbol) != SymbolKind::Type || t.sibling >= 0)
            malformed("bad catch type '" + t.symbol + "'");
          catches.push_back(SketchCatch{t.symbol, block(t.child)});
          c = cn.sibling;
        }
        if (catches.empty()) malformed("try without catch");
        out.push_back(SketchStmt::guarded(std::move(body), std::move(catches)));
        return c;
      }
      default:
        malformed("'" + n.symbol + "' is not a statement");
    }
  }

  std::pair<std::vector<Cexp>, SketchBlock> condition(int i) const {
    if (i < 0) malformed("missing condition");
    if (symbol_kind(at(i).symbol) == SymbolKind::NoCond) {
      const auto& n = at(i);
      if (n.sibling >= 0) malformed("<nocond> has a sibling");
      return {{}, block(n.child)};
    }
    std::vector<Cexp> cond;
    for (;;) {
      if (i < 0) malformed("condition ends without a body");
      const auto& n = at(i);
      if (symbol_kind(n.symbol) != SymbolKind::Call) malformed("'" + n.symbol + "' in condition");
      cond.push_back(Cexp::parse(n.symbol));
      bool more = form_ == TreeForm::Decoder ? is_end(n.child) : n.child < 0;
      if (!more) {
        if (n.sibling >= 0) malformed("last condition element has a sibling");
        return {std::move(cond), block(n.child)};
      }
      if (form_ == TreeForm::Decoder) expect_end(n.child);
      i = n.sibling;
    }
  }

  // Every node must be reached exactly once from the root, so the edges
  // form a tree.
  void check_shape() const {
    std::vector<bool> seen(tree_.nodes.size(), false);
    std::vector<int> todo{0};
    while (!todo.empty()) {
      int i = todo.back();
      todo.pop_back();
      if (i < 0) continue;
      if (static_cast<std::size_t>(i) >= tree_.nodes.size()) malformed("dangling edge");
      if (seen[static_cast<std::size_t>(i)]) malformed("node reached twice");
      seen[static_cast<std::size_t>(i)] = true;
      todo.push_back(tree_.nodes[static_cast<std::size_t>(i)].child);
      todo.push_back(tree_.nodes[static_cast<std::size_t>(i)].sibling);
    }
  }

  const DecoderTree& tree_;
  TreeForm form_;
};

bool same_subtree(const DecoderTree& a, int i, const DecoderTree& b, int j) {
  if ((i < 0) != (j < 0)) return false;
  if (i < 0) return true;
  const auto& x = a.nodes[static_cast<std::size_t>(i)];
  const auto& y = b.nodes[static_cast<std::size_t>(j)];
  return x.symbol == y.symbol && same_subtree(a, x.child, b, y.child) &&
         same_subtree(a, x.sibling, b, y.sibling);
}

}  // namespace

bool DecoderTree::operator==(const DecoderTree& other) const {
  if (nodes.empty() || other.nodes.empty()) return nodes.empty() && other.nodes.empty();
  return same_subtree(*this, 0, other, 0);
}

DecoderTree build_tree(const Sketch& sketch, TreeForm form) {
  return TreeBuilder(form).finish(sketch);
}

std::vector<ProductionPath> paths_of(const DecoderTree& tree) {
  std::vector<ProductionPath> out;
  if (tree.nodes.empty()) return out;
  ProductionPath prefix;
  std::function<void(int)> walk = [&](int i) {
    const auto& n = tree.nodes[static_cast<std::size_t>(i)];
    prefix.push_back(PathStep{n.symbol, Edge::Child});
    if (n.child < 0 && n.sibling < 0) out.push_back(prefix);
    if (n.child >= 0) {
      prefix.back().edge = Edge::Child;
      walk(n.child);
    }
    if (n.sibling >= 0) {
      prefix.back().edge = Edge::Sibling;
      walk(n.sibling);
    }
    prefix.pop_back();
  };
  walk(0);
  return out;
}

std::vector<ProductionPath> production_paths(const Sketch& sketch) {
  return paths_of(build_tree(sketch, TreeForm::Plain));
}

std::vector<ProductionPath> decoder_paths(const Sketch& sketch) {
  return paths_of(build_tree(sketch, TreeForm::Decoder));
}

DecoderTree tree_from_paths(const std::vector<ProductionPath>& paths) {
  DecoderTree tree;
  tree.nodes.push_back(TreeNode{std::string(kRootSymbol)});
  for (const auto& path : paths) {
    if (path.empty() || path.front().node != kRootSymbol) malformed("path does not start at root");
    int cur = 0;
    for (std::size_t k = 1; k < path.size(); ++k) {
      auto& slot = path[k - 1].edge == Edge::Child ? tree.nodes[static_cast<std::size_t>(cur)].child
                                                   : tree.nodes[static_cast<std::size_t>(cur)].sibling;
      if (slot < 0) {
        tree.nodes.push_back(TreeNode{path[k].node});
        // push_back may have invalidated `slot`
        int fresh = static_cast<int>(tree.nodes.size()) - 1;
        auto& n = tree.nodes[static_cast<std::size_t>(cur)];
        (path[k - 1].edge == Edge::Child ? n.child : n.sibling) = fresh;
        cur = fresh;
      } else {
        if (tree.nodes[static_cast<std::size_t>(slot)].symbol != path[k].node)
          malformed("paths disagree at '" + path[k].node + "'");
        cur = slot;
      }
    }
  }
  return tree;
}

Sketch tree_to_sketch(const DecoderTree& tree, TreeForm form) { return TreeReader(tree, form).read(); }

std::string to_string(const ProductionPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ", ";
    out += "(" + path[i].node + ",";
    if (i + 1 == path.size())
      out += "\xC2\xB7";
    else
      out += path[i].edge == Edge::Child ? "c" : "s";
    out += ")";
  }
  return out;
}

SymbolKind symbol_kind(std::string_view s) {
  if (s == kRootSymbol) return SymbolKind::Root;
  if (s == kEndSymbol) return SymbolKind::End;
  if (s == kNoCondSymbol) return SymbolKind::NoCond;
  if (s == kSkipSymbol) return SymbolKind::Skip;
  if (s == kIfSymbol) return SymbolKind::If;
  if (s == kElseSymbol) return SymbolKind::Else;
  if (s == kWhileSymbol) return SymbolKind::While;
  if (s == kTrySymbol) return SymbolKind::Try;
  if (s == kCatchSymbol) return SymbolKind::Catch;
  if (s.find('(') != std::string_view::npos) return SymbolKind::Call;
  return SymbolKind::Type;
}

bool slot_allows(Slot slot, SymbolKind k) {
  bool stmt = k == SymbolKind::Skip || k == SymbolKind::Call || k == SymbolKind::If ||
              k == SymbolKind::While || k == SymbolKind::Try;
  switch (slot) {
    case Slot::None: return false;
    case Slot::StmtFirst: return stmt;
    case Slot::StmtNext:
    case Slot::CondChild: return stmt || k == SymbolKind::End;
    case Slot::CatchFirst: return k == SymbolKind::Catch;
    case Slot::CatchNext: return stmt || k == SymbolKind::End || k == SymbolKind::Catch;
    case Slot::Else: return k == SymbolKind::Else;
    case Slot::CondFirst: return k == SymbolKind::Call || k == SymbolKind::NoCond;
    case Slot::CondMore: return k == SymbolKind::Call;
    case Slot::ExcType: return k == SymbolKind::Type;
  }
  return false;
}

namespace {
bool in_condition(Slot s) { return s == Slot::CondFirst || s == Slot::CondMore; }
}  // namespace

Slot child_slot(Slot placed_in, SymbolKind kind) {
  switch (kind) {
    case SymbolKind::Root:
    case SymbolKind::Else:
    case SymbolKind::Try:
    case SymbolKind::Type:
    case SymbolKind::NoCond: return Slot::StmtFirst;
    case SymbolKind::If:
    case SymbolKind::While: return Slot::CondFirst;
    case SymbolKind::Catch: return Slot::ExcType;
    case SymbolKind::Call: return in_condition(placed_in) ? Slot::CondChild : Slot::None;
    case SymbolKind::Skip:
    case SymbolKind::End: return Slot::None;
  }
  return Slot::None;
}

Slot sibling_slot(Slot placed_in, SymbolKind kind, std::optional<SymbolKind> child) {
  switch (kind) {
    case SymbolKind::Root:
    case SymbolKind::End:
    case SymbolKind::NoCond:
    case SymbolKind::Type: return Slot::None;
    case SymbolKind::Call:
      if (in_condition(placed_in)) return child == SymbolKind::End ? Slot::CondMore : Slot::None;
      return Slot::StmtNext;
    case SymbolKind::Skip:
    case SymbolKind::While:
    case SymbolKind::Else: return Slot::StmtNext;
    case SymbolKind::If: return Slot::Else;
    case SymbolKind::Try: return Slot::CatchFirst;
    case SymbolKind::Catch: return Slot::CatchNext;
  }
  return Slot::None;
}

}  // namespace sketchgen
