#include "sketchgen/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace sketchgen {

using nlohmann::json;

namespace {

json tensors_to_json(const GedParams& p) {
  json out = json::object();
  for (const Tensor* t : p.tensors())
    out[t->name] = json{{"shape", {t->rows, t->cols}}, {"data", t->v}};
  return out;
}

void tensors_from_json(const json& j, GedParams& p, const char* what) {
  for (Tensor* t : p.tensors()) {
    if (!j.contains(t->name))
      throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": missing tensor " + t->name);
    const auto& e = j.at(t->name);
    auto shape = e.at("shape").get<std::vector<std::size_t>>();
    auto data = e.at("data").get<std::vector<double>>();
    if (shape.size() != 2 || shape[0] != t->rows || shape[1] != t->cols || data.size() != t->size()) {
      std::ostringstream msg;
      msg << what << ": tensor " << t->name << " expected " << t->rows << "x" << t->cols;
      throw Error(ErrorKind::ShapeMismatch, msg.str());
    }
    t->v = std::move(data);
  }
  if (j.size() != p.tensors().size())
    throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": unexpected extra tensors");
}

}  // namespace

json checkpoint_to_json(const TrainState& st) {
  std::ostringstream rng;
  rng << st.rng;
  return json{{"format", "sketchgen-checkpoint"},
              {"version", kCheckpointVersion},
              {"hyperparams", hyperparams_to_json(st.model.hyper)},
              {"vocabularies", vocabularies_to_json(st.model.vocab)},
              {"params", tensors_to_json(st.model.params)},
              {"adam",
               {{"t", st.adam.t}, {"m", tensors_to_json(st.adam.m)}, {"v", tensors_to_json(st.adam.v)}}},
              {"epochs_done", st.epochs_done},
              {"rng", rng.str()},
              {"epoch_loss", st.epoch_loss}};
}

TrainState checkpoint_from_json(const json& j) {
  try {
    if (j.value("format", "") != "sketchgen-checkpoint")
      throw Error(ErrorKind::MalformedRecord, "not a sketchgen checkpoint");
    if (j.at("version").get<int>() != kCheckpointVersion)
      throw Error(ErrorKind::MalformedRecord, "unsupported checkpoint version");
    // The template fixes every expected shape; its random values are
    // overwritten below.
    auto st = start_training(hyperparams_from_json(j.at("hyperparams")),
                             vocabularies_from_json(j.at("vocabularies")));
    tensors_from_json(j.at("params"), st.model.params, "params");
    const auto& adam = j.at("adam");
    st.adam.t = adam.at("t").get<std::int64_t>();
    tensors_from_json(adam.at("m"), st.adam.m, "adam.m");
    tensors_from_json(adam.at("v"), st.adam.v, "adam.v");
    st.epochs_done = j.at("epochs_done").get<int>();
    std::istringstream rng(j.at("rng").get<std::string>());
    rng >> st.rng;
    if (!rng) throw Error(ErrorKind::MalformedRecord, "bad generator state");
    st.epoch_loss = j.at("epoch_loss").get<std::vector<double>>();
    return st;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedRecord, std::string("checkpoint: ") + e.what());
  }
}

void save_checkpoint(const TrainState& st, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << checkpoint_to_json(st).dump() << '\n';
  if (!out) throw Error(ErrorKind::Io, "failed writing " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedRecord, path.string() + ": " + e.what());
  }
  return checkpoint_from_json(j);
}

}  // namespace sketchgen
