#include "sketchgen/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "sketchgen/production_paths.hpp"
#include "sketchgen/type_check.hpp"

namespace sketchgen {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path resolve(const json& j, const char* key, const fs::path& base, const fs::path& fallback) {
  if (!j.contains(key)) return fallback;
  fs::path p = j.at(key).get<std::string>();
  return p.is_relative() && !base.empty() ? base / p : p;
}

std::ifstream open_in(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + p.string());
  return in;
}

std::ofstream open_out(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + p.string());
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::string pair_key(const Label& l, const Sketch& s) { return label_to_json(l).dump() + "|" + sketch_to_record(s); }

}  // namespace

RunConfig config_from_json(const json& j, RunConfig c, const fs::path& base) {
  try {
    c.corpus = resolve(j, "corpus", base, c.corpus);
    c.api_db = resolve(j, "api_db", base, c.api_db);
    c.dataset = resolve(j, "dataset", base, c.dataset);
    c.checkpoint = resolve(j, "checkpoint", base, c.checkpoint);
    c.out_dir = resolve(j, "out_dir", base, c.out_dir);
    if (j.contains("seed")) {
      c.seed = j.at("seed").get<std::uint64_t>();
      c.hyper.seed = c.seed;
      c.walk.seed = c.seed;
    }
    if (j.contains("hyperparams")) c.hyper = hyperparams_from_json(j.at("hyperparams"), c.hyper);
    if (j.contains("walk")) {
      const auto& w = j.at("walk");
      c.walk.max_steps = w.value("max_steps", c.walk.max_steps);
      c.walk.max_restarts = w.value("max_restarts", c.walk.max_restarts);
      c.walk.simplicity_bias = w.value("simplicity_bias", c.walk.simplicity_bias);
      c.walk.seed = w.value("seed", c.walk.seed);
    }
    if (j.contains("fractions")) c.fractions = j.at("fractions").get<std::vector<double>>();
    c.samples = j.value("samples", c.samples);
    c.top_k = j.value("top_k", c.top_k);
    c.walks_per_sample = j.value("walks_per_sample", c.walks_per_sample);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("config: ") + e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& path, RunConfig base) {
  auto in = open_in(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
  return config_from_json(j, std::move(base), path.parent_path());
}

json config_to_json(const RunConfig& c) {
  return json{{"corpus", c.corpus.string()},
              {"api_db", c.api_db.string()},
              {"dataset", c.dataset.string()},
              {"checkpoint", c.checkpoint.string()},
              {"out_dir", c.out_dir.string()},
              {"seed", c.seed},
              {"hyperparams", hyperparams_to_json(c.hyper)},
              {"walk",
               {{"max_steps", c.walk.max_steps},
                {"max_restarts", c.walk.max_restarts},
                {"simplicity_bias", c.walk.simplicity_bias},
                {"seed", c.walk.seed}}},
              {"fractions", c.fractions},
              {"samples", c.samples},
              {"top_k", c.top_k},
              {"walks_per_sample", c.walks_per_sample}};
}

Dataset ingest_corpus(std::istream& in, const ApiDatabase& db, IngestStats* stats) {
  IngestStats local;
  IngestStats& st = stats ? *stats : local;
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++st.total;
    auto skip = [&](const std::string& why) {
      ++st.skipped;
      st.diagnostics.push_back("line " + std::to_string(lineno) + ": " + why);
    };
    try {
      auto j = json::parse(line);
      if (!j.is_object() || !j.contains("program") || !j.at("program").is_string()) {
        skip("record has no program text");
        continue;
      }
      DatasetRecord r;
      r.program = parse_program(j.at("program").get<std::string>());
      auto typing = type_check(r.program, db);
      r.sketch = abstract(r.program, typing);
      r.label = j.contains("label") ? label_from_json(j.at("label")) : extract_label(r.program, typing, db);
      if (r.label.empty()) {
        skip("empty label");
        continue;
      }
      out.push_back(std::move(r));
      ++st.kept;
    } catch (const json::exception& e) {
      skip(e.what());
    } catch (const Error& e) {
      skip(e.what());
    }
  }
  if (st.skipped * 2 > st.total)
    throw Error(ErrorKind::Parse, "skipped " + std::to_string(st.skipped) + " of " + std::to_string(st.total) +
                                      " records; first problem: " + st.diagnostics.front());
  return out;
}

Dataset read_corpus(const fs::path& path, const ApiDatabase& db, IngestStats* stats) {
  auto in = open_in(path);
  return ingest_corpus(in, db, stats);
}

json dataset_record_to_json(const DatasetRecord& r) {
  json paths = json::array();
  for (const auto& p : production_paths(r.sketch)) {
    json steps = json::array();
    for (std::size_t i = 0; i < p.size(); ++i)
      steps.push_back({p[i].node, i + 1 == p.size() ? "." : p[i].edge == Edge::Child ? "c" : "s"});
    paths.push_back(std::move(steps));
  }
  return json{{"program", print_program(r.program)},
              {"label", label_to_json(r.label)},
              {"sketch", sketch_to_json(r.sketch)},
              {"paths", std::move(paths)}};
}

DatasetRecord dataset_record_from_json(const json& j, const ApiDatabase& db) {
  try {
    DatasetRecord r;
    r.program = parse_program(j.at("program").get<std::string>());
    r.label = label_from_json(j.at("label"));
    r.sketch = sketch_from_json(j.at("sketch"));
    if (!(abstract(r.program, db) == r.sketch))
      throw Error(ErrorKind::MalformedRecord, "sketch does not match program");
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("dataset record: ") + e.what());
  }
}

void write_dataset(const Dataset& data, const fs::path& path) {
  auto out = open_out(path);
  for (const auto& r : data) out << dataset_record_to_json(r).dump() << '\n';
}

Dataset read_dataset(const fs::path& path, const ApiDatabase& db) {
  auto in = open_in(path);
  Dataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(dataset_record_from_json(json::parse(line), db));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::MalformedRecord, path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.kind(), path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

Vocabularies build_vocabularies(const Dataset& data) {
  std::vector<Label> labels;
  std::vector<std::vector<std::string>> symbols;
  for (const auto& r : data) {
    labels.push_back(r.label);
    std::vector<std::string> syms;
    for (const auto& n : build_tree(r.sketch, TreeForm::Decoder).nodes) syms.push_back(n.symbol);
    symbols.push_back(std::move(syms));
  }
  return build_vocabularies(labels, symbols);
}

std::vector<Example> make_examples(const Dataset& data, const Vocabularies& vocab) {
  std::vector<Example> out;
  for (const auto& r : data)
    out.push_back(Example{encode_label(r.label, vocab), encode_tree(build_tree(r.sketch, TreeForm::Decoder), vocab.symbols)});
  return out;
}

QueryResult query(const Model& model, const ApiDatabase& db, const Label& label, const QueryOptions& opts) {
  QueryResult res;
  auto encoded = encode_label(label, model.vocab, &res.dropped);
  auto post = posterior(model.params, encoded);
  std::mt19937_64 rng(opts.seed);
  SampleOptions so{model.hyper.max_nodes, false};
  for (std::size_t i = 0; i < opts.samples; ++i) {
    auto z = sample_z(post, rng);
    try {
      res.sketches.push_back(sample_sketch(model, z, post.mean, rng, so));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::SizeBudgetExceeded) throw;
      ++res.oversized;
    }
  }
  if (!res.sketches.empty())
    res.top = concretize_top_k(res.sketches, db, opts.walk, opts.k, opts.walks_per_sample);
  return res;
}

EvalReport evaluate(const Model& model, const ApiDatabase& db, const Dataset& test, const Dataset& training,
                    const EvalOptions& opts) {
  std::set<std::string> seen;
  for (const auto& r : training) seen.insert(pair_key(r.label, r.sketch));

  EvalReport report;
  for (double f : opts.fractions) {
    ReportColumn all{f, 0, {}}, unseen{f, 0, {}};
    for (std::size_t i = 0; i < test.size(); ++i) {
      const auto& r = test[i];
      // Same seed for a record at every fraction: the subsampled labels are
      // nested and the sampler noise is shared, so columns differ only by
      // the evidence withheld.
      auto seed = mix_seed(opts.query.seed, i);
      std::mt19937_64 rng(seed);
      auto label = subsample_label(r.label, f, rng);
      auto q = opts.query;
      q.seed = seed;
      q.walk.seed = mix_seed(seed, 1);
      auto res = query(model, db, label, q);
      std::vector<ProgramPtr> predicted;
      for (const auto& p : res.top.programs) predicted.push_back(p.program);
      auto s = score(r.program, predicted, db);
      bool is_unseen = !seen.count(pair_key(r.label, r.sketch));
      for (std::size_t m = 0; m < 5; ++m) {
        all.mean.m[m] += s.m[m];
        if (is_unseen) unseen.mean.m[m] += s.m[m];
      }
      ++all.records;
      unseen.records += is_unseen;
    }
    for (auto* col : {&all, &unseen})
      if (col->records)
        for (auto& x : col->mean.m) x /= static_cast<double>(col->records);
    report.all.push_back(all);
    report.unseen.push_back(unseen);
  }
  return report;
}

std::string dominant_package(const Sketch& sketch, const ApiDatabase& db) {
  std::map<std::string, int> counts;
  for (const auto& c : abstract_calls(sketch)) {
    const auto& pkg = db.package_of(c.receiver);
    if (!pkg.empty()) ++counts[pkg];
  }
  std::string best;
  int n = 0;
  for (const auto& [pkg, k] : counts)
    if (k > n) best = pkg, n = k;
  return best;
}

void export_latent(const Model& model, const ApiDatabase& db, const Dataset& data, std::uint64_t seed,
                   std::ostream& out) {
  const auto d = static_cast<std::size_t>(model.hyper.d);
  out << "# seed=" << seed << "\n";
  for (std::size_t i = 0; i < d; ++i) out << "z_" << i + 1 << ",";
  out << "api_label\n";
  std::mt19937_64 rng(seed);
  out << std::setprecision(9);
  for (const auto& r : data) {
    auto z = sample_z(posterior(model.params, encode_label(r.label, model.vocab)), rng);
    for (double x : z) out << x << ",";
    out << dominant_package(r.sketch, db) << "\n";
  }
}

namespace {

ApiDatabase require_db(const RunConfig& cfg) {
  if (cfg.api_db.empty()) throw Error(ErrorKind::InvalidArgument, "no API database given");
  return load_api_database(cfg.api_db);
}

fs::path checkpoint_path(const RunConfig& cfg) {
  return cfg.checkpoint.empty() ? cfg.out_dir / "model.ckpt.json" : cfg.checkpoint;
}

QueryOptions query_options(const RunConfig& cfg) {
  QueryOptions q;
  q.samples = cfg.samples;
  q.k = cfg.top_k;
  q.walk = cfg.walk;
  q.walks_per_sample = cfg.walks_per_sample;
  q.seed = cfg.seed;
  return q;
}

}  // namespace

IngestOutput cmd_ingest(const RunConfig& cfg, std::ostream& log) {
  if (cfg.corpus.empty()) throw Error(ErrorKind::InvalidArgument, "no corpus given");
  auto db = require_db(cfg);
  IngestOutput out;
  auto data = read_corpus(cfg.corpus, db, &out.stats);
  for (const auto& d : out.stats.diagnostics) log << "skipped " << d << '\n';
  log << "ingested " << out.stats.kept << " of " << out.stats.total << " records (" << out.stats.skipped
      << " skipped)\n";
  out.dataset = cfg.dataset.empty() ? cfg.out_dir / "dataset.jsonl" : cfg.dataset;
  out.vocab = cfg.out_dir / "vocab.json";
  write_dataset(data, out.dataset);
  auto v = vocabularies_to_json(build_vocabularies(data));
  v["seed"] = cfg.seed;
  open_out(out.vocab) << v.dump(2) << '\n';
  log << "wrote " << out.dataset.string() << " and " << out.vocab.string() << '\n';
  return out;
}

TrainOutput cmd_train(const RunConfig& cfg, bool resume, std::ostream& log) {
  auto db = require_db(cfg);
  if (cfg.dataset.empty()) throw Error(ErrorKind::InvalidArgument, "no dataset given");
  auto data = read_dataset(cfg.dataset, db);
  if (data.empty()) throw Error(ErrorKind::InvalidArgument, "dataset " + cfg.dataset.string() + " is empty");
  auto vocab = build_vocabularies(data);
  auto examples = make_examples(data, vocab);

  TrainOutput out;
  out.checkpoint = checkpoint_path(cfg);
  out.loss_csv = cfg.out_dir / "loss.csv";
  if (resume && fs::exists(out.checkpoint)) {
    out.state = load_checkpoint(out.checkpoint);
    if (!(out.state.model.vocab == vocab))
      throw Error(ErrorKind::ShapeMismatch, "checkpoint vocabularies do not match the dataset");
    out.state.model.hyper.epochs = cfg.hyper.epochs;
    log << "resuming at epoch " << out.state.epochs_done << '\n';
  } else {
    out.state = start_training(cfg.hyper, vocab);
  }
  log << "training on " << examples.size() << " records, |G| = " << vocab.symbols.size() << ", "
      << out.state.model.params.parameter_count() << " parameters\n";
  int remaining = std::max(0, cfg.hyper.epochs - out.state.epochs_done);
  train_epochs(out.state, examples, remaining,
               [&](int epoch, double l) { log << "epoch " << epoch << " loss " << l << '\n'; });

  save_checkpoint(out.state, out.checkpoint);
  auto csv = open_out(out.loss_csv);
  csv << "# seed=" << out.state.model.hyper.seed << "\nepoch,loss\n" << std::setprecision(17);
  for (std::size_t i = 0; i < out.state.epoch_loss.size(); ++i) csv << i + 1 << "," << out.state.epoch_loss[i] << '\n';
  log << "wrote " << out.checkpoint.string() << " and " << out.loss_csv.string() << '\n';
  return out;
}

SampleCommandOutput cmd_sample(const RunConfig& cfg, const Label& label, std::ostream& out, std::ostream& log) {
  auto t0 = std::chrono::steady_clock::now();
  auto db = require_db(cfg);
  auto st = load_checkpoint(checkpoint_path(cfg));
  SampleCommandOutput res;
  res.result = query(st.model, db, label, query_options(cfg));
  const auto& r = res.result;
  for (const auto& d : r.dropped) log << "warning: dropping out-of-vocabulary label element " << d << '\n';
  if (!label.empty() && r.dropped.size() == label.size())
    log << "warning: no label element is known; sampling from the prior\n";
  if (r.oversized) log << r.oversized << " sketch samples exceeded " << st.model.hyper.max_nodes << " nodes\n";

  out << "# seed=" << cfg.seed << '\n';
  for (std::size_t i = 0; i < r.top.programs.size(); ++i) {
    const auto& p = r.top.programs[i];
    out << "#" << i + 1 << " (sketch x" << p.sketch_count << ", hits " << p.hits << ", cost " << p.cost << ")\n"
        << pretty_print(p.program) << '\n';
  }
  if (r.top.programs.empty()) {
    log << "no program could be concretized\n";
    for (const auto& s : r.top.failed) log << "  failed sketch: " << to_text(s) << '\n';
    if (r.sketches.empty()) log << "  every sketch sample exceeded the node budget\n";
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log << "sampled " << r.sketches.size() << " sketches, ranked " << r.top.programs.size() << " programs in "
      << std::fixed << std::setprecision(3) << res.seconds << " s\n"
      << std::defaultfloat;
  return res;
}

EvalReport cmd_eval(const RunConfig& cfg, const fs::path& test_dataset, std::ostream& log) {
  auto db = require_db(cfg);
  auto st = load_checkpoint(checkpoint_path(cfg));
  auto test = read_dataset(test_dataset, db);
  Dataset training;
  if (!cfg.dataset.empty() && fs::exists(cfg.dataset)) training = read_dataset(cfg.dataset, db);
  EvalOptions opts;
  opts.fractions = cfg.fractions;
  opts.query = query_options(cfg);
  auto report = evaluate(st.model, db, test, training, opts);

  auto seed_line = "# seed=" + std::to_string(cfg.seed) + "\n";
  open_out(cfg.out_dir / "eval.csv") << seed_line << report_csv(report.all);
  open_out(cfg.out_dir / "eval_unseen.csv") << seed_line << report_csv(report.unseen);
  auto text = report_text(report.all, "All test records") + "\n" +
              report_text(report.unseen, "Unseen (label, sketch) pairs");
  open_out(cfg.out_dir / "eval.txt") << seed_line << text;
  log << text;
  return report;
}

fs::path cmd_export_latent(const RunConfig& cfg, const fs::path& out_csv, std::ostream& log) {
  auto db = require_db(cfg);
  auto st = load_checkpoint(checkpoint_path(cfg));
  auto data = read_dataset(cfg.dataset, db);
  auto path = out_csv.empty() ? cfg.out_dir / "latent.csv" : out_csv;
  auto out = open_out(path);
  export_latent(st.model, db, data, cfg.seed, out);
  log << "wrote " << data.size() << " latent rows to " << path.string() << '\n';
  return path;
}

}  // namespace sketchgen
