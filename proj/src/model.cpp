#include "sketchgen/model.hpp"

#include <cmath>

namespace sketchgen {

using nlohmann::json;

void Hyperparams::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "hyperparameter " + what); };
  if (d <= 0) bad("d must be positive");
  for (int u : enc_units)
    if (u <= 0) bad("encoder units must be positive");
  if (h_dec <= 0) bad("h_dec must be positive");
  if (batch <= 0) bad("batch must be positive");
  if (!(lr >= 0.0)) bad("lr must be non-negative");
  if (epochs < 0) bad("epochs must be non-negative");
  if (!(beta >= 0.0)) bad("beta must be non-negative");
  if (max_nodes <= 0) bad("max_nodes must be positive");
  if (!(label_dropout >= 0.0 && label_dropout <= 1.0)) bad("label_dropout must lie in [0, 1]");
}

json hyperparams_to_json(const Hyperparams& h) {
  return json{{"d", h.d},
              {"enc_units", h.enc_units},
              {"h_dec", h.h_dec},
              {"batch", h.batch},
              {"lr", h.lr},
              {"epochs", h.epochs},
              {"seed", h.seed},
              {"variant", h.variant == Variant::Gsnn ? "gsnn" : "ged"},
              {"beta", h.beta},
              {"max_nodes", h.max_nodes},
              {"label_dropout", h.label_dropout}};
}

Hyperparams hyperparams_from_json(const json& j, Hyperparams h) {
  try {
    if (j.contains("d")) h.d = j.at("d").get<int>();
    if (j.contains("enc_units")) h.enc_units = j.at("enc_units").get<std::array<int, kEvidenceKinds>>();
    if (j.contains("h_dec")) h.h_dec = j.at("h_dec").get<int>();
    if (j.contains("batch")) h.batch = j.at("batch").get<int>();
    if (j.contains("lr")) h.lr = j.at("lr").get<double>();
    if (j.contains("epochs")) h.epochs = j.at("epochs").get<int>();
    if (j.contains("seed")) h.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("beta")) h.beta = j.at("beta").get<double>();
    if (j.contains("max_nodes")) h.max_nodes = j.at("max_nodes").get<int>();
    if (j.contains("label_dropout")) h.label_dropout = j.at("label_dropout").get<double>();
    if (j.contains("variant")) {
      auto v = j.at("variant").get<std::string>();
      if (v == "ged")
        h.variant = Variant::Ged;
      else if (v == "gsnn")
        h.variant = Variant::Gsnn;
      else
        throw Error(ErrorKind::InvalidArgument, "unknown variant '" + v + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("hyperparameters: ") + e.what());
  }
  h.validate();
  return h;
}

std::vector<Tensor*> GedParams::tensors() {
  std::vector<Tensor*> out;
  for (auto& e : enc)
    for (Tensor* t : {&e.Wh, &e.bh, &e.Wd, &e.bd, &e.log_sigma}) out.push_back(t);
  for (auto& e : edge)
    for (Tensor* t : {&e.Wh, &e.bh, &e.Wv, &e.bv, &e.Wy, &e.by}) out.push_back(t);
  for (Tensor* t : {&Wl, &bl, &Wlx}) out.push_back(t);
  return out;
}

std::vector<const Tensor*> GedParams::tensors() const {
  auto mut = const_cast<GedParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

GedParams GedParams::zeros_like() const {
  GedParams z = *this;
  for (Tensor* t : z.tensors()) std::fill(t->v.begin(), t->v.end(), 0.0);
  return z;
}

std::size_t GedParams::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor* t : tensors()) n += t->size();
  return n;
}

bool GedParams::operator==(const GedParams& other) const {
  auto a = tensors();
  auto b = other.tensors();
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(*a[i] == *b[i])) return false;
  return true;
}

GedParams init_params(const Hyperparams& hyper, const Vocabularies& vocab, std::mt19937_64& rng) {
  hyper.validate();
  auto d = static_cast<std::size_t>(hyper.d);
  auto h = static_cast<std::size_t>(hyper.h_dec);
  auto g = vocab.symbols.size();
  GedParams p;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
    auto prefix = "enc." + std::string(to_string(static_cast<EvidenceKind>(k))) + ".";
    auto hk = static_cast<std::size_t>(hyper.enc_units[k]);
    auto& e = p.enc[k];
    e.Wh = Tensor(prefix + "Wh", vocab.evidence[k].size(), hk);
    e.bh = Tensor(prefix + "bh", 1, hk);
    e.Wd = Tensor(prefix + "Wd", hk, d);
    e.bd = Tensor(prefix + "bd", 1, d);
    e.log_sigma = Tensor(prefix + "log_sigma", 1, 1);
    glorot_uniform(e.Wh, rng);
    glorot_uniform(e.Wd, rng);
  }
  const char* names[2] = {"child", "sibling"};
  for (std::size_t k = 0; k < 2; ++k) {
    auto prefix = std::string("dec.") + names[k] + ".";
    auto& e = p.edge[k];
    e.Wh = Tensor(prefix + "Wh", h, h);
    e.bh = Tensor(prefix + "bh", 1, h);
    e.Wv = Tensor(prefix + "Wv", g, h);
    e.bv = Tensor(prefix + "bv", 1, h);
    e.Wy = Tensor(prefix + "Wy", h, g);
    e.by = Tensor(prefix + "by", 1, g);
    glorot_uniform(e.Wh, rng);
    glorot_uniform(e.Wv, rng);
    glorot_uniform(e.Wy, rng);
  }
  p.Wl = Tensor("dec.Wl", d, h);
  p.bl = Tensor("dec.bl", 1, h);
  p.Wlx = Tensor("dec.Wlx", d, h);
  glorot_uniform(p.Wl, rng);
  glorot_uniform(p.Wlx, rng);
  return p;
}

Model make_model(const Hyperparams& hyper, Vocabularies vocab) {
  std::mt19937_64 rng(hyper.seed);
  Model m{hyper, std::move(vocab), {}};
  m.params = init_params(m.hyper, m.vocab, rng);
  return m;
}

Vector encode_element(const GedParams& p, EvidenceKind kind, int index) {
  const auto& e = p.enc[static_cast<std::size_t>(kind)];
  if (index < 0 || static_cast<std::size_t>(index) >= e.Wh.rows)
    throw Error(ErrorKind::OutOfVocabulary,
                std::string(to_string(kind)) + " index " + std::to_string(index) + " out of range");
  Vector a(e.Wh.row(static_cast<std::size_t>(index)).begin(), e.Wh.row(static_cast<std::size_t>(index)).end());
  add_to(a, e.bh.v);
  Vector f = e.bd.v;
  add_vec_mat(a, e.Wd, f);
  for (auto& x : f) x = std::tanh(x);
  return f;
}

Posterior posterior(const GedParams& p, const EncodedLabel& label) {
  auto d = p.Wl.rows;
  Vector xbar(d, 0.0);
  double n = 0.0;
  for (std::size_t k = 0; k < kEvidenceKinds; ++k) {
    const auto& idx = label.indices[k];
    if (idx.empty()) continue;
    double s = std::exp(-2.0 * p.enc[k].log_sigma.v[0]);
    for (int i : idx) add_to(xbar, encode_element(p, static_cast<EvidenceKind>(k), i), s);
    n += static_cast<double>(idx.size()) * s;
  }
  Posterior post;
  post.variance = 1.0 / (1.0 + n);
  post.mean = std::move(xbar);
  for (auto& x : post.mean) x *= post.variance;
  return post;
}

Vector reparameterize(const Posterior& post, std::span<const double> eps) {
  Vector z = post.mean;
  double sd = std::sqrt(post.variance);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += sd * eps[i];
  return z;
}

Vector draw_standard_normal(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector eps(d);
  for (auto& x : eps) x = normal(rng);
  return eps;
}

Vector sample_z(const Posterior& post, std::mt19937_64& rng) {
  return reparameterize(post, draw_standard_normal(post.mean.size(), rng));
}

double kl_to_prior(const Posterior& post) {
  auto d = static_cast<double>(post.mean.size());
  double v = post.variance;
  return 0.5 * (d * v + dot(post.mean, post.mean) - d - d * std::log(v));
}

}  // namespace sketchgen
