// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sketchgen/checkpoint.hpp"
#include "sketchgen/pipeline.hpp"
#include "sketchgen/production_paths.hpp"
#include "sketchgen/train.hpp"

using namespace sketchgen;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr int kAc1MinPrograms = 1000;
constexpr double kAc1MaxSeconds = 120.0;
constexpr int kAc2Walks = 1000;
constexpr int kAc3Sketches = 20;
constexpr int kAc3Walks = 200;
constexpr std::size_t kAc3MaxSpace = 500;
constexpr double kAc3Bias = 0.0;
constexpr double kAc3MaxSeconds = 300.0;
constexpr int kAc4Labels = 20;
constexpr int kAc4GridPoints = 100;
constexpr double kAc4RelTol = 1e-6;
constexpr double kAc5RelTol = 1e-4;
constexpr double kAc6MinM1 = 0.9;
constexpr double kAc6MaxSeconds = 300.0;
constexpr double kAc10MaxSeconds = 10.0;

// Training and evaluation settings shared by the model criteria.
Hyperparams toy_hyper(std::uint64_t seed) {
  Hyperparams h;
  h.lr = 0.005;
  h.batch = 2;
  h.epochs = 50;
  h.seed = seed;
  return h;
}

constexpr int kWalksPerSample = 10;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(const char* id, const Outcome& o) {
  std::cout << id << " " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  failures += !o.pass;
}

void run(const char* id, const std::function<Outcome()>& body) {
  try {
    report(id, body());
  } catch (const std::exception& e) {
    report(id, {false, std::string("exception: ") + e.what()});
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

struct ToyRun {
  ApiDatabase db;
  Dataset data;
  Vocabularies vocab;
  TrainState state;
};

ToyRun train_toy(std::uint64_t seed) {
  ToyRun r{oracle::toy_db(), {}, {}, {}};
  r.data = read_corpus(oracle::toy_corpus_path(), r.db);
  r.vocab = build_vocabularies(r.data);
  r.state = train(make_examples(r.data, r.vocab), toy_hyper(seed), r.vocab);
  return r;
}

// Successful walks on sketches sampled from the toy model, one walk per
// sampled sketch, cycling through the corpus labels.
struct Walked {
  Sketch sketch;
  ProgramPtr program;
};

std::vector<Walked> sampled_walks(const ToyRun& r, int wanted, int* attempts) {
  std::vector<Walked> out;
  std::mt19937_64 rng(17);
  WalkConfig cfg;
  *attempts = 0;
  for (std::size_t i = 0; static_cast<int>(out.size()) < wanted && *attempts < 20 * wanted; ++i) {
    const auto& label = r.data[i % r.data.size()].label;
    auto post = posterior(r.state.model.params, encode_label(label, r.vocab));
    auto z = sample_z(post, rng);
    Sketch s;
    try {
      s = sample_sketch(r.state.model, z, post.mean, rng, SampleOptions{});
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SizeBudgetExceeded) throw;
      continue;
    }
    ++*attempts;
    auto w = random_walk(s, r.db, cfg, rng);
    if (w.ok()) out.push_back({s, w.program});
  }
  return out;
}

// Hand-built sketches over a small API, each with a concretization space
// small enough to enumerate.
ApiDatabase ac3_db() {
  return ApiDatabase::parse(R"j({
    "types": ["A", "B", "C", "boolean", "Err", "Fault"],
    "subtypes": [{"sub": "Fault", "super": "Err"}],
    "methods": [
      {"receiver": "A", "name": "new", "params": [], "returns": "A"},
      {"receiver": "A", "name": "new", "params": ["B"], "returns": "A"},
      {"receiver": "A", "name": "m", "params": [], "returns": "B"},
      {"receiver": "A", "name": "ok", "params": [], "returns": "boolean"},
      {"receiver": "A", "name": "close", "params": []},
      {"receiver": "B", "name": "new", "params": [], "returns": "B"},
      {"receiver": "B", "name": "n", "params": ["A"], "returns": "boolean"},
      {"receiver": "B", "name": "get", "params": [], "returns": "C"},
      {"receiver": "C", "name": "use", "params": ["A", "B"]},
      {"receiver": "Err", "name": "report", "params": []},
      {"receiver": "Err", "name": "text", "params": [], "returns": "B"}
    ]})j");
}

std::vector<std::string> ac3_sketches() {
  return {
      R"j({"node":"skip"})j",
      R"j({"node":"call","call":"A.new()"})j",
      R"j({"node":"call","call":"A.close()"})j",
      R"j({"node":"call","call":"A.new(B)"})j",
      R"j({"node":"seq","body":[{"node":"call","call":"A.new()"},{"node":"call","call":"A.close()"}]})j",
      R"j({"node":"seq","body":[{"node":"call","call":"A.new()"},{"node":"call","call":"A.m()"}]})j",
      R"j({"node":"seq","body":[{"node":"call","call":"B.new()"},{"node":"call","call":"A.new(B)"}]})j",
      R"j({"node":"seq","body":[{"node":"call","call":"A.m()"},{"node":"call","call":"B.get()"}]})j",
      R"j({"node":"call","call":"C.use(A,B)"})j",
      R"j({"node":"seq","body":[{"node":"call","call":"A.new()"},{"node":"call","call":"C.use(A,B)"}]})j",
      R"j({"node":"while","cond":["A.ok()"],"body":{"node":"skip"}})j",
      R"j({"node":"while","cond":[],"body":{"node":"call","call":"A.close()"}})j",
      R"j({"node":"if","cond":["A.ok()"],"then":{"node":"call","call":"A.close()"},"else":{"node":"skip"}})j",
      R"j({"node":"if","cond":["A.m()","B.n(A)"],"then":{"node":"skip"},"else":{"node":"skip"}})j",
      R"j({"node":"seq","body":[{"node":"call","call":"A.new()"},{"node":"while","cond":["A.ok()"],"body":{"node":"call","call":"A.close()"}}]})j",
      R"j({"node":"try","body":{"node":"call","call":"A.close()"},"catches":[{"node":"catch","type":"Err","body":{"node":"call","call":"Err.report()"}}]})j",
      R"j({"node":"try","body":{"node":"call","call":"A.new()"},"catches":[{"node":"catch","type":"Fault","body":{"node":"call","call":"Err.report()"}},{"node":"catch","type":"Err","body":{"node":"skip"}}]})j",
      R"j({"node":"try","body":{"node":"call","call":"A.m()"},"catches":[{"node":"catch","type":"Err","body":{"node":"call","call":"Err.text()"}}]})j",
      R"j({"node":"seq","body":[{"node":"call","call":"B.new()"},{"node":"if","cond":["B.n(A)"],"then":{"node":"call","call":"A.close()"},"else":{"node":"skip"}}]})j",
      R"j({"node":"seq","body":[{"node":"call","call":"A.new()"},{"node":"call","call":"A.m()"},{"node":"call","call":"B.get()"}]})j",
  };
}

Vocabularies ac5_vocab() {
  std::vector<Label> labels = {Label{{"read", "close"}, {"Reader"}, {"r", "c", "x"}}};
  return build_vocabularies(labels, {{"skip", "Reader.read()", "while"}});
}

Example ac5_example(const Label& label, const Sketch& s, const Vocabularies& v) {
  return Example{encode_label(label, v), encode_tree(build_tree(s, TreeForm::Decoder), v.symbols)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig cli_config(const fs::path& dir) {
  RunConfig cfg;
  cfg.api_db = oracle::data_dir() / "toy_api.json";
  cfg.corpus = oracle::toy_corpus_path();
  cfg.out_dir = dir;
  cfg.dataset = dir / "dataset.jsonl";
  cfg.hyper = toy_hyper(1);
  cfg.top_k = 10;
  cfg.walks_per_sample = kWalksPerSample;
  return cfg;
}

}  // namespace

int main() {
  std::cout << "acceptance: toy API database and corpus from " << oracle::data_dir().string() << std::endl;

  std::optional<ToyRun> seed1;
  auto toy = [&]() -> const ToyRun& {
    if (!seed1) seed1 = train_toy(1);
    return *seed1;
  };

  std::vector<Walked> walks;
  int attempts = 0;

  run("AC1", [&] {
    auto t0 = std::chrono::steady_clock::now();
    const auto& r = toy();
    walks = sampled_walks(r, std::max(kAc1MinPrograms, kAc2Walks), &attempts);
    int parsed = 0, typed = 0;
    for (const auto& w : walks) {
      try {
        auto back = parse_program(print_program(w.program));
        parsed += same_program(back, w.program);
        type_check(back, r.db);
        ++typed;
      } catch (const Error&) {
      }
    }
    double secs = seconds_since(t0);
    int n = static_cast<int>(walks.size());
    bool ok = n >= kAc1MinPrograms && parsed == n && typed == n && secs < kAc1MaxSeconds;
    return Outcome{ok, std::to_string(n) + " concretizations from " + std::to_string(attempts) +
                           " sampled sketches; parsed " + std::to_string(parsed) + ", type-checked " +
                           std::to_string(typed) + "; " + fmt(secs, 3) + " s (limit " + fmt(kAc1MaxSeconds) + " s)"};
  });

  run("AC2", [&] {
    const auto& r = toy();
    if (static_cast<int>(walks.size()) < kAc2Walks) walks = sampled_walks(r, kAc2Walks, &attempts);
    int same = 0, n = std::min(static_cast<int>(walks.size()), kAc2Walks);
    for (int i = 0; i < n; ++i) same += abstract(walks[static_cast<std::size_t>(i)].program, r.db) ==
                                        walks[static_cast<std::size_t>(i)].sketch;
    return Outcome{n == kAc2Walks && same == n,
                   std::to_string(same) + " of " + std::to_string(n) + " walks abstract back to their sketch"};
  });

  run("AC3", [&] {
    auto t0 = std::chrono::steady_clock::now();
    auto db = ac3_db();
    auto records = ac3_sketches();
    int equal = 0;
    std::size_t largest = 0;
    std::string first_miss;
    for (std::size_t i = 0; i < records.size(); ++i) {
      auto s = record_to_sketch(records[i]);
      auto expected = oracle::enumerate_concretizations(s, db);
      largest = std::max(largest, expected.size());
      std::set<std::string> got;
      WalkConfig cfg;
      cfg.simplicity_bias = kAc3Bias;
      std::mt19937_64 rng(1000 + i);
      for (int w = 0; w < kAc3Walks; ++w) {
        auto res = random_walk(s, db, cfg, rng);
        if (res.ok()) got.insert(canonical_text(res.program));
      }
      bool match = got == expected && !expected.empty() && expected.size() <= kAc3MaxSpace;
      equal += match;
      if (!match && first_miss.empty())
        first_miss = "; sketch " + std::to_string(i + 1) + " walks " + std::to_string(got.size()) + " vs enumeration " +
                     std::to_string(expected.size());
    }
    double secs = seconds_since(t0);
    bool ok = equal == kAc3Sketches && static_cast<int>(records.size()) == kAc3Sketches && secs < kAc3MaxSeconds;
    return Outcome{ok, std::to_string(equal) + " of " + std::to_string(records.size()) +
                           " sketches match exactly (largest space " + std::to_string(largest) + ", " +
                           std::to_string(kAc3Walks) + " walks each at bias " + fmt(kAc3Bias) + "); " + fmt(secs, 3) + " s" + first_miss};
  });

  run("AC4", [&] {
    Hyperparams h;
    h.d = 2;
    h.enc_units = {4, 3, 5};
    auto m = make_model(h, ac5_vocab());
    std::mt19937_64 rng(44);
    std::normal_distribution<double> gauss(0.0, 0.7);
    double worst = 0.0;
    for (int label = 0; label < kAc4Labels; ++label) {
      for (auto& e : m.params.enc) e.log_sigma(0, 0) = gauss(rng);
      EncodedLabel l;
      for (std::size_t k = 0; k < kEvidenceKinds; ++k)
        for (int i = 0; i < static_cast<int>(m.vocab.evidence[k].size()); ++i)
          if (rng() % 2) l.indices[k].push_back(i);
      auto post = posterior(m.params, l);
      double first = 0.0;
      for (int g = 0; g < kAc4GridPoints; ++g) {
        std::vector<double> z = {-2.0 + 0.4 * (g % 10), -2.0 + 0.4 * (g / 10)};
        double log_ratio =
            oracle::unnormalized_log_posterior(m.params, l, z) - oracle::log_normal(z, post.mean, post.variance);
        if (g == 0) first = log_ratio;
        worst = std::max(worst, std::abs(std::exp(log_ratio - first) - 1.0));
      }
    }
    auto prior = posterior(m.params, EncodedLabel{});
    bool prior_exact = prior.variance == 1.0 && std::all_of(prior.mean.begin(), prior.mean.end(),
                                                             [](double x) { return x == 0.0; });
    return Outcome{worst <= kAc4RelTol && prior_exact,
                   "worst relative deviation of the density ratio " + fmt(worst, 3) + " (limit " + fmt(kAc4RelTol) +
                       "); empty label gives Normal(0, I) " + (prior_exact ? "exactly" : "NOT exactly")};
  });

  run("AC5", [&] {
    auto v = ac5_vocab();
    Cexp read{"Reader", "read", {}};
    Sketch loop{{SketchStmt::abstract_call(read), SketchStmt::loop({read}, {SketchStmt::skip()})}};
    std::vector<Example> batch = {ac5_example(Label{{"read", "close"}, {"Reader"}, {"r"}}, loop, v),
                                  ac5_example(Label{{"close"}, {}, {"x", "c"}}, Sketch{}, v)};
    std::vector<Vector> eps = {Vector{0.4, -0.9}, Vector{-1.2, 0.3}};
    double worst = 0.0;
    std::size_t entries = 0;
    std::string where;
    for (auto variant : {Variant::Ged, Variant::Gsnn}) {
      Hyperparams h;
      h.d = 2;
      h.enc_units = {2, 2, 3};
      h.h_dec = 3;
      h.variant = variant;
      h.beta = 0.7;
      h.seed = 5;
      auto m = make_model(h, v);
      for (auto& e : m.params.enc) e.log_sigma(0, 0) = 0.3;
      auto r = oracle::check_gradients(m.params, h, batch, eps);
      entries += r.entries;
      if (r.worst_error >= worst) worst = r.worst_error, where = r.worst_tensor;
    }
    return Outcome{worst <= kAc5RelTol && v.symbols.size() == 5,
                   "|G| = " + std::to_string(v.symbols.size()) + ", " + std::to_string(entries) +
                       " entries over GED and GSNN; worst relative error " + fmt(worst, 3) + " in " + where +
                       " (limit " + fmt(kAc5RelTol) + ")"};
  });

  // AC6 and AC7 share the toy evaluation: each seed trains for 50 epochs and
  // scores the top-10 programs for every training record at each fraction.
  std::vector<EvalReport> evals;
  std::vector<double> eval_seconds;
  auto toy_eval = [&](std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = seed == 1 ? toy() : train_toy(seed);
    EvalOptions opts;
    opts.query.walks_per_sample = kWalksPerSample;
    opts.query.seed = seed;
    auto rep = evaluate(r.state.model, r.db, r.data, r.data, opts);
    eval_seconds.push_back(seconds_since(t0));
    return rep;
  };

  run("AC6", [&] {
    evals.push_back(toy_eval(1));
    const auto& col = evals[0].all.front();
    bool ok = col.fraction == 1.0 && col.records == 50 && col.mean.m[0] >= kAc6MinM1 &&
              eval_seconds[0] < kAc6MaxSeconds;
    return Outcome{ok, "M1 at top-10, 100% observability = " + fmt(col.mean.m[0]) + " over " +
                           std::to_string(col.records) + " records (need >= " + fmt(kAc6MinM1) + "); " +
                           fmt(eval_seconds[0], 3) + " s"};
  });

  run("AC7", [&] {
    while (evals.size() < 3) evals.push_back(toy_eval(evals.size() + 1));
    const std::size_t cols = evals[0].all.size();
    std::vector<double> mean(cols, 0.0);
    std::ostringstream per_seed;
    for (std::size_t s = 0; s < evals.size(); ++s) {
      per_seed << " seed" << s + 1 << "=[";
      for (std::size_t c = 0; c < cols; ++c) {
        mean[c] += evals[s].all[c].mean.m[0] / static_cast<double>(evals.size());
        per_seed << (c ? " " : "") << fmt(evals[s].all[c].mean.m[0], 3);
      }
      per_seed << "]";
    }
    bool ok = true;
    std::ostringstream avg;
    for (std::size_t c = 0; c < cols; ++c) {
      avg << (c ? " " : "") << fmt(evals[0].all[c].fraction * 100, 3) << "%:" << fmt(mean[c]);
      if (c > 0 && mean[c] > mean[c - 1]) ok = false;
    }
    return Outcome{ok && cols == 4, "mean M1 " + avg.str() + ";" + per_seed.str()};
  });

  run("AC8", [&] {
    const auto& r = toy();
    auto examples = make_examples(r.data, r.vocab);
    Hyperparams ged = toy_hyper(9);
    Hyperparams gsnn = ged;
    gsnn.variant = Variant::Gsnn;
    gsnn.beta = 0.0;
    std::mt19937_64 ia(ged.seed), ib(gsnn.seed);
    auto pa = init_params(ged, r.vocab, ia);
    auto pb = init_params(gsnn, r.vocab, ib);
    std::fill(pb.Wlx.v.begin(), pb.Wlx.v.end(), 0.0);
    int equal = 0, total = 0;
    std::mt19937_64 ra(3), rb(3);
    for (std::size_t start = 0; start < examples.size(); start += 5, ++total) {
      std::span<const Example> batch(examples.data() + start, std::min<std::size_t>(5, examples.size() - start));
      double a = loss(pa, ged, batch, ra);
      double b = loss(pb, gsnn, batch, rb);
      equal += std::memcmp(&a, &b, sizeof a) == 0;
    }
    return Outcome{equal == total, std::to_string(equal) + " of " + std::to_string(total) +
                                       " toy batches give bit-identical GED and GSNN losses"};
  });

  run("AC9", [&] {
    int ok = 0, total = 0;
    auto check = [&](bool c) { ok += c, ++total; };
    std::set<std::string> a{"a"}, ab{"a", "b"}, b{"b"};
    check(jaccard_distance(a, ab) == 0.5);
    check(jaccard_distance(ab, ab) == 0.0);
    check(jaccard_distance(a, b) == 1.0);
    auto db = oracle::java_io_db();
    auto expected = parse_program(oracle::kReadFileText);
    auto renamed = parse_program(
        "try { let a = new FileReader($String); let b = new BufferedReader(a); "
        "while (let c = b.readLine(): c) do { skip }; call b.close() } "
        "catch (x: FileNotFoundException) { call x.printStackTrace() } "
        "catch (y: IOException) { call y.printStackTrace() }");
    auto exact = score(expected, {parse_program("skip"), renamed}, db);
    check(exact.m[0] == 1.0);
    for (int i = 1; i < 5; ++i) check(exact.m[i] == 0.0);
    std::vector<ProgramPtr> preds = {parse_program("let r = new BufferedReader($FileReader); call r.close()"),
                                     parse_program("let q = new FileReader($String); let w = new BufferedReader(q); "
                                                   "call w.readLine()")};
    std::vector<ProgramPtr> preds_renamed = {
        parse_program("let k = new BufferedReader($FileReader); call k.close()"),
        parse_program("let u = new FileReader($String); let t = new BufferedReader(u); call t.readLine()")};
    check(score(expected, preds, db) == score(expected, preds_renamed, db));
    check(score(expected, preds, db) == score(renamed, preds, db));
    return Outcome{ok == total, std::to_string(ok) + " of " + std::to_string(total) + " exact checks hold"};
  });

  fs::path scratch = fs::temp_directory_path() / "sketchgen_acceptance";
  fs::remove_all(scratch);

  run("AC10", [&] {
    auto cfg = cli_config(scratch / "latency");
    std::ostringstream log, out;
    cmd_ingest(cfg, log);
    cmd_train(cfg, false, log);
    Label label;
    label.calls = {"readLine"};
    auto res = cmd_sample(cfg, label, out, log);
    bool ok = res.seconds < kAc10MaxSeconds && res.result.top.programs.size() == 10;
    return Outcome{ok, "sample with k=10 ranked " + std::to_string(res.result.top.programs.size()) +
                           " programs in " + fmt(res.seconds, 3) + " s (limit " + fmt(kAc10MaxSeconds) + " s)"};
  });

  run("AC11", [&] {
    std::vector<std::string> ckpt, ranked;
    for (const char* name : {"run_a", "run_b"}) {
      auto cfg = cli_config(scratch / name);
      std::ostringstream log, out;
      cmd_ingest(cfg, log);
      auto t = cmd_train(cfg, false, log);
      Label label;
      label.calls = {"readLine"};
      label.types = {"BufferedReader"};
      cmd_sample(cfg, label, out, log);
      ckpt.push_back(slurp(t.checkpoint));
      ranked.push_back(out.str());
    }
    bool ok = ckpt[0] == ckpt[1] && ranked[0] == ranked[1] && !ranked[0].empty();
    return Outcome{ok, std::string("checkpoints ") + (ckpt[0] == ckpt[1] ? "identical" : "DIFFER") + " (" +
                           std::to_string(ckpt[0].size()) + " bytes), ranked lists " +
                           (ranked[0] == ranked[1] ? "identical" : "DIFFER")};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
