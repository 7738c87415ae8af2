#include "rfsum/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"
#include "rfsum/errors.hpp"

namespace rfsum {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json config_to_json(const ModelConfig& c) {
  return json{{"emb_dim", c.emb_dim},       {"enc_hidden", c.enc_hidden},
              {"enc_layers", c.enc_layers}, {"dec_hidden", c.dec_hidden},
              {"attn_dim", c.attn_dim},     {"proj_dim", c.proj_dim},
              {"variant", variant_name(c.variant)}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.emb_dim = j.at("emb_dim").get<int>();
  c.enc_hidden = j.at("enc_hidden").get<int>();
  c.enc_layers = j.at("enc_layers").get<int>();
  c.dec_hidden = j.at("dec_hidden").get<int>();
  c.attn_dim = j.at("attn_dim").get<int>();
  c.proj_dim = j.at("proj_dim").get<int>();
  c.variant = variant_from_name(j.at("variant").get<std::string>());
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return json{{"lr", c.lr},
              {"beta1", c.beta1},
              {"beta2", c.beta2},
              {"eps", c.eps},
              {"clip", c.clip},
              {"batch_size", c.batch_size},
              {"max_epochs", c.max_epochs},
              {"patience", c.patience},
              {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.lr = j.at("lr").get<double>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.clip = j.at("clip").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.patience = j.at("patience").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

// Numbers only; non-finite values round-trip through JSON null.
json finite_or_null(double x) {
  if (std::isfinite(x)) return json(x);
  return json(nullptr);
}

double number_or_infinity(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

struct NamedVector {
  std::string name;
  std::vector<int> shape;
  const std::vector<double>* values;
};

void append_params(std::vector<NamedVector>& out, const std::string& prefix,
                   const std::vector<std::pair<std::string, TensorRef>>& params) {
  for (const auto& [name, t] : params)
    out.push_back({prefix + name, t->shape, &t->v});
}

void write_file(const std::string& path, const json& manifest,
                const std::vector<NamedVector>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << manifest.dump() << '\n';
  for (const auto& t : tensors)
    out.write(reinterpret_cast<const char*>(t.values->data()),
              static_cast<std::streamsize>(t.values->size() * sizeof(double)));
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

json tensor_directory(const std::vector<NamedVector>& tensors) {
  json dir = json::array();
  for (const auto& t : tensors)
    dir.push_back(json{{"name", t.name}, {"shape", t.shape}});
  return dir;
}

json read_manifest(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw FormatError("'" + path + "' has no manifest line");
  try {
    json manifest = json::parse(line);
    if (!manifest.is_object()) throw FormatError("manifest is not an object");
    if (manifest.at("format_version").get<int>() != kFormatVersion)
      throw FormatError("unsupported checkpoint format version");
    return manifest;
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint manifest: " + std::string(e.what()));
  }
}

// Reads the binary section into the named slots, enforcing that the directory
// and the expected parameter set agree exactly.
void read_tensors(std::istream& in, const json& directory,
                  std::unordered_map<std::string, TensorRef>& slots,
                  std::unordered_map<std::string, std::vector<double>>* loose,
                  const std::string& path) {
  std::unordered_set<std::string> filled;
  for (const auto& entry : directory) {
    std::string name;
    std::vector<int> shape;
    try {
      name = entry.at("name").get<std::string>();
      shape = entry.at("shape").get<std::vector<int>>();
    } catch (const json::exception& e) {
      throw FormatError("bad tensor directory entry: " + std::string(e.what()));
    }
    std::size_t count = 1;
    for (int d : shape) {
      if (d < 1) throw FormatError("tensor '" + name + "' has a bad shape");
      count *= static_cast<std::size_t>(d);
    }
    std::vector<double> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (static_cast<std::size_t>(in.gcount()) != count * sizeof(double))
      throw FormatError("'" + path + "' is truncated at tensor '" + name + "'");

    auto it = slots.find(name);
    if (it != slots.end()) {
      if (it->second->shape != shape)
        throw FormatError("tensor '" + name + "' has shape mismatch");
      it->second->v = std::move(values);
      if (!filled.insert(name).second)
        throw FormatError("tensor '" + name + "' appears twice");
    } else if (loose) {
      if (!loose->emplace(name, std::move(values)).second)
        throw FormatError("tensor '" + name + "' appears twice");
    } else {
      throw FormatError("unexpected tensor '" + name + "'");
    }
  }
  for (const auto& [name, t] : slots)
    if (!filled.count(name))
      throw FormatError("tensor '" + name + "' missing from checkpoint");
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError("'" + path + "' has trailing data");
}

std::unordered_map<std::string, TensorRef> slot_map(
    const std::vector<std::pair<std::string, TensorRef>>& params,
    const std::string& prefix = "") {
  std::unordered_map<std::string, TensorRef> m;
  for (const auto& [name, t] : params) m.emplace(prefix + name, t);
  return m;
}

Vocabulary vocab_from_manifest(const json& manifest) {
  try {
    auto tokens = manifest.at("vocab").get<std::vector<std::string>>();
    return Vocabulary::from_tokens(tokens);
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint vocabulary: " + std::string(e.what()));
  }
}

}  // namespace

void save_model_checkpoint(const std::string& path, const Model& m, int epoch,
                           double dev_nll) {
  std::vector<NamedVector> tensors;
  append_params(tensors, "", m.named_params());

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["kind"] = "model";
  manifest["config"] = config_to_json(m.cfg);
  manifest["vocab"] = m.vocab.all_tokens();
  manifest["epoch"] = epoch;
  manifest["dev_nll"] = finite_or_null(dev_nll);
  manifest["tensors"] = tensor_directory(tensors);
  write_file(path, manifest, tensors);
}

ModelCheckpoint load_model_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json manifest = read_manifest(in, path);

  ModelCheckpoint out;
  try {
    if (manifest.at("kind").get<std::string>() != "model")
      throw FormatError("'" + path + "' is not a model checkpoint");
    ModelConfig cfg = config_from_json(manifest.at("config"));
    Vocabulary vocab = vocab_from_manifest(manifest);
    out.model = init_model(cfg, vocab, 0);  // scaffold; every value overwritten
    out.epoch = manifest.at("epoch").get<int>();
    out.dev_nll = number_or_infinity(manifest.at("dev_nll"));
    auto slots = slot_map(out.model.named_params());
    read_tensors(in, manifest.at("tensors"), slots, nullptr, path);
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint manifest: " + std::string(e.what()));
  }
  return out;
}

void save_train_checkpoint(const std::string& path, const Model& current,
                           const TrainState& state, const TrainConfig& cfg) {
  // A state that never completed an epoch stores the live model as "best".
  const Model& best = state.best.embedding ? state.best : current;

  auto params = current.named_params();
  std::vector<NamedVector> tensors;
  append_params(tensors, "", params);
  append_params(tensors, "best.", best.named_params());

  // Adam moments; parameters the optimizer has not touched yet get zeros,
  // which is exactly how missing slots would be initialized on first use.
  // Reserved up front so the pointers taken below stay valid.
  std::vector<std::vector<double>> moment_storage;
  moment_storage.reserve(2 * params.size());
  for (bool first_moment : {true, false}) {
    const std::string prefix = first_moment ? "adam.m." : "adam.v.";
    const auto& slots = first_moment ? state.opt.m : state.opt.v;
    for (const auto& [name, t] : params) {
      auto it = slots.find(name);
      if (it != slots.end()) {
        if (it->second.size() != t->v.size())
          throw ShapeMismatch("optimizer slot '" + name + "' has wrong size");
        moment_storage.push_back(it->second);
      } else {
        moment_storage.push_back(std::vector<double>(t->v.size(), 0.0));
      }
      tensors.push_back({prefix + name, t->shape, &moment_storage.back()});
    }
  }

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["kind"] = "train_state";
  manifest["config"] = config_to_json(current.cfg);
  manifest["vocab"] = current.vocab.all_tokens();
  manifest["train_config"] = train_config_to_json(cfg);
  manifest["opt_step"] = state.opt.step;
  manifest["best_dev"] = finite_or_null(state.best_dev);
  manifest["best_epoch"] = state.best_epoch;
  manifest["bad_epochs"] = state.bad_epochs;
  manifest["next_epoch"] = state.next_epoch;
  manifest["tensors"] = tensor_directory(tensors);
  write_file(path, manifest, tensors);
}

TrainCheckpoint load_train_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json manifest = read_manifest(in, path);

  TrainCheckpoint out;
  try {
    if (manifest.at("kind").get<std::string>() != "train_state")
      throw FormatError("'" + path + "' is not a training checkpoint");
    ModelConfig cfg = config_from_json(manifest.at("config"));
    Vocabulary vocab = vocab_from_manifest(manifest);
    out.current = init_model(cfg, vocab, 0);
    out.state.best = init_model(cfg, vocab, 0);
    out.config = train_config_from_json(manifest.at("train_config"));
    out.state.opt.step = manifest.at("opt_step").get<long long>();
    out.state.best_dev = number_or_infinity(manifest.at("best_dev"));
    out.state.best_epoch = manifest.at("best_epoch").get<int>();
    out.state.bad_epochs = manifest.at("bad_epochs").get<int>();
    out.state.next_epoch = manifest.at("next_epoch").get<int>();

    auto slots = slot_map(out.current.named_params());
    for (auto& [name, t] : out.state.best.named_params())
      slots.emplace("best." + name, t);
    std::unordered_map<std::string, std::vector<double>> loose;
    read_tensors(in, manifest.at("tensors"), slots, &loose, path);

    for (auto& [name, values] : loose) {
      if (name.rfind("adam.m.", 0) == 0)
        out.state.opt.m[name.substr(7)] = std::move(values);
      else if (name.rfind("adam.v.", 0) == 0)
        out.state.opt.v[name.substr(7)] = std::move(values);
      else
        throw FormatError("unexpected tensor '" + name + "'");
    }
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint manifest: " + std::string(e.what()));
  }
  return out;
}

std::string checkpoint_kind(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  json manifest = read_manifest(in, path);
  try {
    return manifest.at("kind").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError("bad checkpoint manifest: " + std::string(e.what()));
  }
}

}  // namespace rfsum
