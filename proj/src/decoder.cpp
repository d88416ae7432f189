#include <cmath>

#include "sketchgen/model.hpp"

namespace sketchgen {

EncodedTree encode_tree(const DecoderTree& tree, const IndexMap& symbols) {
  EncodedTree out;
  for (const auto& n : tree.nodes) {
    auto idx = symbols.find(n.symbol);
    if (!idx) throw Error(ErrorKind::OutOfVocabulary, "decoder symbol '" + n.symbol + "' not in G");
    out.symbol.push_back(*idx);
    out.child.push_back(n.child);
    out.sibling.push_back(n.sibling);
  }
  return out;
}

namespace {

const EdgeParams& edge_params(const GedParams& p, Edge e) { return p.edge[static_cast<std::size_t>(e)]; }

Vector hidden(const GedParams& p, std::span<const double> h_prev, int symbol, Edge edge) {
  const auto& e = edge_params(p, edge);
  Vector a = e.bh.v;
  add_vec_mat(h_prev, e.Wh, a);
  add_to(a, e.Wv.row(static_cast<std::size_t>(symbol)));
  add_to(a, e.bv.v);
  for (auto& x : a) x = std::tanh(x);
  return a;
}

Vector logits(const GedParams& p, std::span<const double> h, Edge edge) {
  const auto& e = edge_params(p, edge);
  Vector out = e.by.v;
  add_vec_mat(h, e.Wy, out);
  return out;
}

// Forward pass over a whole tree, keeping what the backward pass needs.
struct Tape {
  struct Step {
    int prev;  // index into states
    int input;
    Edge edge;
    int target;
    Vector y;
  };
  std::vector<Vector> states;
  std::vector<Step> steps;
  double log_prob = 0.0;
};

class TapeRecorder {
public:
  TapeRecorder(const GedParams& p, const EncodedTree& t, Tape& tape) : p_(p), t_(t), tape_(tape) {}

  void run(Vector h0) {
    tape_.states.push_back(std::move(h0));
    visit(0, 0);
  }

private:
  int step(int prev, int input, Edge edge, int target) {
    auto h = hidden(p_, tape_.states[static_cast<std::size_t>(prev)], input, edge);
    auto y = softmax(logits(p_, h, edge));
    tape_.log_prob += std::log(y[static_cast<std::size_t>(target)]);
    tape_.states.push_back(std::move(h));
    tape_.steps.push_back(Tape::Step{prev, input, edge, target, std::move(y)});
    return static_cast<int>(tape_.states.size()) - 1;
  }

  int visit(int node, int state) {
    auto n = static_cast<std::size_t>(node);
    int sym = t_.symbol[n];
    int cur = state;
    if (int c = t_.child[n]; c >= 0)
      cur = visit(c, step(state, sym, Edge::Child, t_.symbol[static_cast<std::size_t>(c)]));
    if (int s = t_.sibling[n]; s >= 0)
      return visit(s, step(cur, sym, Edge::Sibling, t_.symbol[static_cast<std::size_t>(s)]));
    return cur;
  }

  const GedParams& p_;
  const EncodedTree& t_;
  Tape& tape_;
};

// Backpropagates `scale`·(−log_prob) through the tape; returns ∂/∂h0.
Vector backprop(const GedParams& p, const Tape& tape, double scale, GedParams& g) {
  std::vector<Vector> gs(tape.states.size(), Vector(tape.states[0].size(), 0.0));
  for (std::size_t i = tape.steps.size(); i-- > 0;) {
    const auto& st = tape.steps[i];
    const auto& h = tape.states[i + 1];
    const auto& h_prev = tape.states[static_cast<std::size_t>(st.prev)];
    const auto& e = edge_params(p, st.edge);
    auto& ge = g.edge[static_cast<std::size_t>(st.edge)];

    Vector g_logits = st.y;
    g_logits[static_cast<std::size_t>(st.target)] -= 1.0;
    for (auto& x : g_logits) x *= scale;
    add_outer(ge.Wy, h, g_logits);
    add_to(ge.by.v, g_logits);

    Vector g_a = gs[i + 1];
    add_mat_vec(e.Wy, g_logits, g_a);
    for (std::size_t k = 0; k < g_a.size(); ++k) g_a[k] *= 1.0 - h[k] * h[k];
    add_outer(ge.Wh, h_prev, g_a);
    add_to(ge.bh.v, g_a);
    add_to(ge.Wv.row(static_cast<std::size_t>(st.input)), g_a);
    add_to(ge.bv.v, g_a);
    add_mat_vec(e.Wh, g_a, gs[static_cast<std::size_t>(st.prev)]);
  }
  return gs[0];
}

}  // namespace

StepOutput decoder_step(const GedParams& p, std::span<const double> h_prev, int symbol, Edge edge) {
  StepOutput out;
  out.h = hidden(p, h_prev, symbol, edge);
  out.y = softmax(logits(p, out.h, edge));
  return out;
}

Vector initial_state(const GedParams& p, Variant variant, std::span<const double> z,
                     std::span<const double> mean) {
  Vector h0 = p.bl.v;
  add_vec_mat(z, p.Wl, h0);
  if (variant == Variant::Gsnn) {
    Vector lift(h0.size(), 0.0);
    add_vec_mat(mean, p.Wlx, lift);
    add_to(h0, lift);
  }
  return h0;
}

double tree_log_prob(const GedParams& p, const EncodedTree& tree, std::span<const double> h0) {
  Tape tape;
  TapeRecorder(p, tree, tape).run(Vector(h0.begin(), h0.end()));
  return tape.log_prob;
}

double path_log_prob(const Model& m, const std::vector<ProductionPath>& paths, std::span<const double> z,
                     std::span<const double> mean) {
  auto tree = encode_tree(tree_from_paths(paths), m.vocab.symbols);
  return tree_log_prob(m.params, tree, initial_state(m.params, m.hyper.variant, z, mean));
}

double loss_and_grad(const GedParams& p, const Hyperparams& hyper, std::span<const Example> batch,
                     std::span<const Vector> eps, GedParams* grad) {
  if (batch.empty()) throw Error(ErrorKind::InvalidArgument, "empty batch");
  if (eps.size() != batch.size()) throw Error(ErrorKind::InvalidArgument, "one noise vector per example");
  const bool gsnn = hyper.variant == Variant::Gsnn;
  const double scale = 1.0 / static_cast<double>(batch.size());
  const std::size_t d = p.Wl.rows;
  double total = 0.0;

  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];

    // Encoder forward, keeping pre-activations and outputs per element.
    std::array<std::vector<Vector>, kEvidenceKinds> hid, out;
    std::array<Vector, kEvidenceKinds> F;
    std::array<double, kEvidenceKinds> s{};
    Vector xbar(d, 0.0);
    double n = 0.0;
    for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
      const auto& e = p.enc[k];
      F[k].assign(d, 0.0);
      s[k] = std::exp(-2.0 * e.log_sigma.v[0]);
      for (int idx : ex.label.indices[k]) {
        Vector a(e.Wh.row(static_cast<std::size_t>(idx)).begin(), e.Wh.row(static_cast<std::size_t>(idx)).end());
        add_to(a, e.bh.v);
        Vector f = e.bd.v;
        add_vec_mat(a, e.Wd, f);
        for (auto& x : f) x = std::tanh(x);
        add_to(F[k], f);
        hid[k].push_back(std::move(a));
        out[k].push_back(std::move(f));
      }
      add_to(xbar, F[k], s[k]);
      n += static_cast<double>(ex.label.indices[k].size()) * s[k];
    }
    Posterior post;
    post.variance = 1.0 / (1.0 + n);
    post.mean = xbar;
    for (auto& x : post.mean) x *= post.variance;
    const double v = post.variance;
    Vector z = reparameterize(post, eps[b]);

    Tape tape;
    TapeRecorder(p, ex.tree, tape).run(initial_state(p, hyper.variant, z, post.mean));
    double l = -tape.log_prob;
    if (gsnn) l += hyper.beta * kl_to_prior(post);
    total += l;
    if (!grad) continue;

    // Decoder and lifting.
    Vector g_h0 = backprop(p, tape, scale, *grad);
    add_outer(grad->Wl, z, g_h0);
    add_to(grad->bl.v, g_h0);
    Vector g_mu(d, 0.0);
    add_mat_vec(p.Wl, g_h0, g_mu);  // ∂z/∂mean = I
    double g_v = dot(g_mu, eps[b]) / (2.0 * std::sqrt(v));
    if (gsnn) {
      add_outer(grad->Wlx, post.mean, g_h0);
      add_mat_vec(p.Wlx, g_h0, g_mu);
      add_to(g_mu, post.mean, scale * hyper.beta);
      g_v += scale * hyper.beta * 0.5 * static_cast<double>(d) * (1.0 - 1.0 / v);
    }

    // Posterior: mean = xbar·v, v = 1/(1+n).
    Vector g_xbar = g_mu;
    for (auto& x : g_xbar) x *= v;
    double g_n = -v * v * (dot(g_mu, xbar) + g_v);

    for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
      const auto& idx = ex.label.indices[k];
      if (idx.empty()) continue;
      const auto& e = p.enc[k];
      auto& ge = grad->enc[k];
      double g_s = dot(g_xbar, F[k]) + g_n * static_cast<double>(idx.size());
      ge.log_sigma.v[0] += -2.0 * s[k] * g_s;
      for (std::size_t j = 0; j < idx.size(); ++j) {
        const auto& f = out[k][j];
        Vector g_pre(d);
        for (std::size_t i = 0; i < d; ++i) g_pre[i] = s[k] * g_xbar[i] * (1.0 - f[i] * f[i]);
        add_outer(ge.Wd, hid[k][j], g_pre);
        add_to(ge.bd.v, g_pre);
        Vector g_a(e.Wd.rows, 0.0);
        add_mat_vec(e.Wd, g_pre, g_a);
        add_to(ge.Wh.row(static_cast<std::size_t>(idx[j])), g_a);
        add_to(ge.bh.v, g_a);
      }
    }
  }
  return total * scale;
}

double loss(const GedParams& p, const Hyperparams& hyper, std::span<const Example> batch, std::mt19937_64& rng) {
  std::vector<Vector> eps;
  for (std::size_t i = 0; i < batch.size(); ++i) eps.push_back(draw_standard_normal(p.Wl.rows, rng));
  return loss_and_grad(p, hyper, batch, eps, nullptr);
}

namespace {

class Sampler {
public:
  Sampler(const Model& m, std::mt19937_64& rng, const SampleOptions& opts) : m_(m), rng_(rng), opts_(opts) {
    for (const auto& s : m.vocab.symbols.items()) kinds_.push_back(symbol_kind(s));
  }

  Sketch run(Vector h0) {
    auto root = m_.vocab.symbols.find(kRootSymbol);
    if (!root) throw Error(ErrorKind::InvalidArgument, "decoder vocabulary lacks root");
    add(*root);
    grow(0, Slot::None, std::move(h0));
    return tree_to_sketch(tree_, TreeForm::Decoder);
  }

private:
  int add(int symbol) {
    if (static_cast<int>(tree_.nodes.size()) > opts_.max_nodes)
      throw Error(ErrorKind::SizeBudgetExceeded,
                  "sampled sketch exceeds " + std::to_string(opts_.max_nodes) + " nodes");
    tree_.nodes.push_back(TreeNode{m_.vocab.symbols.at(symbol)});
    syms_.push_back(symbol);
    return static_cast<int>(tree_.nodes.size()) - 1;
  }

  const std::vector<bool>& mask(Slot slot) {
    auto& cached = masks_[static_cast<std::size_t>(slot)];
    if (cached.empty()) {
      cached.resize(kinds_.size());
      bool any = false;
      for (std::size_t i = 0; i < kinds_.size(); ++i) any |= (cached[i] = slot_allows(slot, kinds_[i]));
      if (!any) throw Error(ErrorKind::InvalidArgument, "decoder vocabulary cannot fill a grammar slot");
    }
    return cached;
  }

  int pick(const Vector& y) {
    std::size_t best = 0;
    if (opts_.greedy) {
      for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[best]) best = i;
      return static_cast<int>(best);
    }
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    std::size_t last = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] <= 0.0) continue;
      last = i;
      u -= y[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(last);
  }

  // Expands one node; returns the state after its child subtree and
  // sibling chain.
  Vector grow(int node, Slot placed_in, Vector state) {
    int sym = syms_[static_cast<std::size_t>(node)];
    auto kind = kinds_[static_cast<std::size_t>(sym)];
    Vector cur = state;
    std::optional<SymbolKind> child_kind;
    if (Slot cs = child_slot(placed_in, kind); cs != Slot::None) {
      auto h = hidden(m_.params, state, sym, Edge::Child);
      int c = pick(softmax(logits(m_.params, h, Edge::Child), &mask(cs)));
      int cn = add(c);
      tree_.nodes[static_cast<std::size_t>(node)].child = cn;
      child_kind = kinds_[static_cast<std::size_t>(c)];
      cur = grow(cn, cs, std::move(h));
    }
    if (Slot ss = sibling_slot(placed_in, kind, child_kind); ss != Slot::None) {
      auto h = hidden(m_.params, cur, sym, Edge::Sibling);
      int s = pick(softmax(logits(m_.params, h, Edge::Sibling), &mask(ss)));
      int sn = add(s);
      tree_.nodes[static_cast<std::size_t>(node)].sibling = sn;
      return grow(sn, ss, std::move(h));
    }
    return cur;
  }

  const Model& m_;
  std::mt19937_64& rng_;
  SampleOptions opts_;
  std::vector<SymbolKind> kinds_;
  std::array<std::vector<bool>, 10> masks_;
  DecoderTree tree_;
  std::vector<int> syms_;
};

}  // namespace

Sketch sample_sketch(const Model& m, std::span<const double> z, std::span<const double> mean,
                     std::mt19937_64& rng, const SampleOptions& opts) {
  return Sampler(m, rng, opts).run(initial_state(m.params, m.hyper.variant, z, mean));
}

}  // namespace sketchgen
