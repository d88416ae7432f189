// sketchgen: ingest a corpus, train the encoder-decoder, sample programs for
// a label, evaluate, export latent vectors.
//
// Exit status: 0 on success, 1 for bad input or usage, 2 for internal errors.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "sketchgen/pipeline.hpp"
#include "sketchgen/production_paths.hpp"

namespace fs = std::filesystem;
using namespace sketchgen;

namespace {

struct Overrides {
  std::optional<std::string> config, corpus, api_db, dataset, checkpoint, out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_steps, max_restarts, epochs, batch, d, h_dec, walks_per_sample;
  std::optional<double> simplicity_bias, lr, beta, label_dropout;
  std::optional<std::size_t> top_k, samples;
  std::optional<std::string> variant;
  std::vector<double> fractions;
};

RunConfig make_config(const Overrides& o) {
  RunConfig cfg;
  std::optional<std::string> path = o.config;
  if (!path)
    if (const char* env = std::getenv(kConfigEnvVar); env && *env) path = env;
  if (path) cfg = load_config(*path);

  if (o.corpus) cfg.corpus = *o.corpus;
  if (o.api_db) cfg.api_db = *o.api_db;
  if (o.dataset) cfg.dataset = *o.dataset;
  if (o.checkpoint) cfg.checkpoint = *o.checkpoint;
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.seed) cfg.seed = cfg.hyper.seed = cfg.walk.seed = *o.seed;
  if (o.max_steps) cfg.walk.max_steps = *o.max_steps;
  if (o.max_restarts) cfg.walk.max_restarts = *o.max_restarts;
  if (o.simplicity_bias) cfg.walk.simplicity_bias = *o.simplicity_bias;
  if (o.top_k) cfg.top_k = *o.top_k;
  if (o.samples) cfg.samples = *o.samples;
  if (o.walks_per_sample) cfg.walks_per_sample = *o.walks_per_sample;
  if (!o.fractions.empty()) cfg.fractions = o.fractions;

  nlohmann::json h;
  if (o.epochs) h["epochs"] = *o.epochs;
  if (o.batch) h["batch"] = *o.batch;
  if (o.d) h["d"] = *o.d;
  if (o.h_dec) h["h_dec"] = *o.h_dec;
  if (o.lr) h["lr"] = *o.lr;
  if (o.beta) h["beta"] = *o.beta;
  if (o.label_dropout) h["label_dropout"] = *o.label_dropout;
  if (o.variant) h["variant"] = *o.variant;
  cfg.hyper = hyperparams_from_json(h, cfg.hyper);
  return cfg;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + p.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditional program generation from sparse API labels"};
  app.require_subcommand(1);
  app.fallthrough();
  Overrides o;

  app.add_option("--config", o.config, std::string("JSON config file (default: $") + kConfigEnvVar + ")");
  app.add_option("--api-db", o.api_db, "API database file");
  app.add_option("--corpus", o.corpus, "Line-delimited corpus of programs");
  app.add_option("--dataset", o.dataset, "Ingested dataset file");
  app.add_option("--checkpoint", o.checkpoint, "Model checkpoint file");
  app.add_option("--out-dir", o.out_dir, "Directory for outputs");
  app.add_option("--seed", o.seed, "Seed for every random choice");
  app.add_option("--max-steps", o.max_steps, "Step budget per walk (0: 10 x sketch size)");
  app.add_option("--max-restarts", o.max_restarts, "Restarts before a sketch is given up");
  app.add_option("--simplicity-bias", o.simplicity_bias, "Preference for cheap concretization steps");
  app.add_option("--top-k", o.top_k, "Programs to report");
  app.add_option("--samples", o.samples, "Sketches sampled per query");
  app.add_option("--walks-per-sample", o.walks_per_sample, "Walks per sampled sketch");
  app.add_option("--epochs", o.epochs);
  app.add_option("--batch", o.batch);
  app.add_option("--lr", o.lr);
  app.add_option("--latent-dim", o.d);
  app.add_option("--decoder-units", o.h_dec);
  app.add_option("--beta", o.beta, "KL weight for the gsnn variant");
  app.add_option("--label-dropout", o.label_dropout, "Chance of training an example on part of its label");
  app.add_option("--variant", o.variant, "ged or gsnn")->check(CLI::IsMember({"ged", "gsnn"}));
  app.add_option("--fractions", o.fractions, "Observability fractions for eval")->delimiter(',');

  auto* ingest = app.add_subcommand("ingest", "Type check, abstract and label a corpus");

  auto* abs = app.add_subcommand("abstract", "Print the sketch and production paths of a program");
  std::string program_file;
  abs->add_option("program", program_file, "File holding the program text")->required();

  auto* train = app.add_subcommand("train", "Train on an ingested dataset");
  bool resume = false;
  train->add_flag("--resume", resume, "Continue from the checkpoint if it exists");

  auto* sample = app.add_subcommand("sample", "Generate ranked programs for a label");
  std::string label_json, label_file, calls, types, keys;
  sample->add_option("--label", label_json, R"(Label as JSON, e.g. {"calls":["readLine"]})");
  sample->add_option("--label-file", label_file, "File holding the label JSON");
  sample->add_option("--calls", calls, "Comma-separated API call names");
  sample->add_option("--types", types, "Comma-separated API type names");
  sample->add_option("--keys", keys, "Comma-separated keywords");

  auto* eval = app.add_subcommand("eval", "Score top-k predictions with M1-M5");
  std::string test_file;
  eval->add_option("test", test_file, "Ingested test dataset")->required();

  auto* latent = app.add_subcommand("export-latent", "Write z samples with API labels as CSV");
  std::string latent_out;
  latent->add_option("--out", latent_out, "Output CSV (default: <out-dir>/latent.csv)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto cfg = make_config(o);
    if (*ingest) {
      cmd_ingest(cfg, std::cerr);
    } else if (*abs) {
      auto db = load_api_database(cfg.api_db);
      auto sketch = abstract(parse_program(slurp(program_file)), db);
      std::cout << sketch_to_json(sketch).dump(2) << '\n';
      for (const auto& p : production_paths(sketch)) std::cout << to_string(p) << '\n';
    } else if (*train) {
      cmd_train(cfg, resume, std::cerr);
    } else if (*sample) {
      Label label;
      if (!label_file.empty()) label_json = slurp(label_file);
      if (!label_json.empty()) label = label_from_json(nlohmann::json::parse(label_json));
      for (auto& c : split_list(calls)) label.calls.insert(c);
      for (auto& t : split_list(types)) label.types.insert(t);
      for (auto& k : split_list(keys)) label.keys.insert(k);
      auto out = cmd_sample(cfg, label, std::cout, std::cerr);
      if (out.result.top.programs.empty()) return 1;
    } else if (*eval) {
      cmd_eval(cfg, test_file, std::cout);
    } else if (*latent) {
      cmd_export_latent(cfg, latent_out, std::cerr);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
