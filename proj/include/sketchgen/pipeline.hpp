#pragma once

// End-to-end commands: ingest a corpus into a dataset, train, sample
// programs for a label, evaluate with M1 to M5, export latent vectors.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "sketchgen/checkpoint.hpp"
#include "sketchgen/concretizer.hpp"
#include "sketchgen/labels.hpp"
#include "sketchgen/metrics.hpp"
#include "sketchgen/model.hpp"

namespace sketchgen {

inline constexpr const char* kConfigEnvVar = "SKETCHGEN_CONFIG";

struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path api_db;
  std::filesystem::path dataset;
  std::filesystem::path checkpoint;
  std::filesystem::path out_dir = ".";
  Hyperparams hyper;
  WalkConfig walk;
  std::vector<double> fractions{1.0, 0.75, 0.5, 0.25};
  std::size_t samples = 100;  // sketches drawn per query
  std::size_t top_k = 10;
  int walks_per_sample = 1;
  std::uint64_t seed = 1;
};

/// Reads a JSON config document; absent keys keep their defaults. Relative
/// paths are resolved against the config file's directory.
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {},
                           const std::filesystem::path& relative_to = {});
nlohmann::json config_to_json(const RunConfig& cfg);

// Datasets.

struct DatasetRecord {
  ProgramPtr program;
  Label label;
  Sketch sketch;
};

using Dataset = std::vector<DatasetRecord>;

struct IngestStats {
  std::size_t total = 0;
  std::size_t kept = 0;
  std::size_t skipped = 0;
  std::vector<std::string> diagnostics;  // one per skipped record
};

/// Parses line-delimited `{program, label?}` records. Records that fail to
/// parse or type check are skipped and counted; a missing label is
/// extracted from the program. Throws Parse when more than half the records
/// are skipped.
Dataset ingest_corpus(std::istream& in, const ApiDatabase& db, IngestStats* stats = nullptr);
Dataset read_corpus(const std::filesystem::path& path, const ApiDatabase& db, IngestStats* stats = nullptr);

/// Dataset file: one JSON record per line with program text, label, sketch
/// record and the sketch's production paths.
nlohmann::json dataset_record_to_json(const DatasetRecord& r);
DatasetRecord dataset_record_from_json(const nlohmann::json& j, const ApiDatabase& db);
void write_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path, const ApiDatabase& db);

Vocabularies build_vocabularies(const Dataset& data);
/// Encodes labels and decoder-form trees. Throws OutOfVocabulary.
std::vector<Example> make_examples(const Dataset& data, const Vocabularies& vocab);

// Sampling.

struct QueryOptions {
  std::size_t samples = 100;
  std::size_t k = 10;
  WalkConfig walk;
  int walks_per_sample = 1;
  std::uint64_t seed = 1;
};

struct QueryResult {
  TopK top;
  std::vector<std::string> dropped;  // out-of-vocabulary label elements
  std::size_t oversized = 0;         // sketch samples over the node budget
  std::vector<Sketch> sketches;      // well-formed sketch samples, in order
};

QueryResult query(const Model& model, const ApiDatabase& db, const Label& label, const QueryOptions& opts);

// Evaluation.

struct EvalReport {
  std::vector<ReportColumn> all;
  std::vector<ReportColumn> unseen;  // records whose (label, sketch) pair is absent from training
};

struct EvalOptions {
  std::vector<double> fractions{1.0, 0.75, 0.5, 0.25};
  QueryOptions query;
};

/// Per-fraction mean scores; `training` may be empty, in which case every
/// record counts as unseen.
EvalReport evaluate(const Model& model, const ApiDatabase& db, const Dataset& test, const Dataset& training,
                    const EvalOptions& opts);

/// Package that most abstract calls in the sketch belong to (ties broken
/// alphabetically); empty if the sketch makes no calls.
std::string dominant_package(const Sketch& sketch, const ApiDatabase& db);

/// CSV with columns z_1..z_d,api_label; one row per record, after a
/// "# seed=N" comment line.
void export_latent(const Model& model, const ApiDatabase& db, const Dataset& data, std::uint64_t seed,
                   std::ostream& out);

// Commands. Each logs progress to `log` and writes into cfg.out_dir.

struct IngestOutput {
  std::filesystem::path dataset;
  std::filesystem::path vocab;
  IngestStats stats;
};
IngestOutput cmd_ingest(const RunConfig& cfg, std::ostream& log);

struct TrainOutput {
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;
  TrainState state;
};
/// Resumes from cfg.checkpoint when `resume` is set and the file exists,
/// continuing up to hyper.epochs total epochs.
TrainOutput cmd_train(const RunConfig& cfg, bool resume, std::ostream& log);

struct SampleCommandOutput {
  QueryResult result;
  double seconds = 0.0;
};
SampleCommandOutput cmd_sample(const RunConfig& cfg, const Label& label, std::ostream& out, std::ostream& log);

EvalReport cmd_eval(const RunConfig& cfg, const std::filesystem::path& test_dataset, std::ostream& log);

std::filesystem::path cmd_export_latent(const RunConfig& cfg, const std::filesystem::path& out_csv,
                                        std::ostream& log);

}  // namespace sketchgen
