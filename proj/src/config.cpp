#include "sruner/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>

namespace sruner {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

void check_keys(const nlohmann::json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const nlohmann::json& j, const char* key, T& into, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    into = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + "." + key + ": wrong value type");
  }
}

void read_optimizer(const nlohmann::json& j, OptimizerConfig& o, const std::string& where) {
  check_keys(j, where, {"lr", "weight_decay", "warmup_epochs"});
  read(j, "lr", o.lr, where);
  read(j, "weight_decay", o.weight_decay, where);
  read(j, "warmup_epochs", o.warmup_epochs, where);
  if (!(o.lr > 0.0) || o.weight_decay < 0.0 || o.warmup_epochs < 0.0) throw ConfigError(where + ": out of range");
}

nlohmann::json optimizer_json(const OptimizerConfig& o) {
  return {{"lr", o.lr}, {"weight_decay", o.weight_decay}, {"warmup_epochs", o.warmup_epochs}};
}

}  // namespace

RunConfig genia_preset() {
  RunConfig c;
  c.sru.latent_multiplier = 10;
  c.sru.half_context = 240;
  c.sru.train_alpha = true;
  c.train.encoder.lr = 3e-5;
  return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
  check_keys(j, "config", {"preset", "corpora", "encoder", "sru", "generator", "train", "run_dir"});
  RunConfig c;
  if (j.contains("preset")) {
    const std::string preset = j["preset"].get<std::string>();
    if (preset == "genia") {
      c = genia_preset();
    } else if (preset != "default") {
      throw ConfigError("config: unknown preset '" + preset + "'");
    }
  }

  if (j.contains("corpora")) {
    if (!j["corpora"].is_array()) throw ConfigError("config.corpora: expected an array");
    for (const auto& cj : j["corpora"]) {
      const std::string where = "config.corpora[" + std::to_string(c.corpora.size()) + "]";
      check_keys(cj, where, {"name", "format", "train", "dev", "test", "types"});
      CorpusConfig cc;
      read(cj, "name", cc.name, where);
      read(cj, "format", cc.format, where);
      read(cj, "train", cc.train, where);
      read(cj, "dev", cc.dev, where);
      read(cj, "test", cc.test, where);
      read(cj, "types", cc.types, where);
      if (cc.name.empty() || cc.train.empty() || cc.dev.empty()) {
        throw ConfigError(where + ": name, train and dev are required");
      }
      if (cc.format != "nested" && cc.format != "bio") throw ConfigError(where + ".format: expected nested or bio");
      cc.train = resolve(cc.train, base_dir);
      cc.dev = resolve(cc.dev, base_dir);
      cc.test = resolve(cc.test, base_dir);
      c.corpora.push_back(std::move(cc));
    }
  }

  if (j.contains("encoder")) {
    const auto& e = j["encoder"];
    check_keys(e, "config.encoder", {"kind", "dim", "path", "max_subwords"});
    read(e, "kind", c.encoder.kind, "config.encoder");
    read(e, "dim", c.encoder.dim, "config.encoder");
    read(e, "path", c.encoder.path, "config.encoder");
    read(e, "max_subwords", c.encoder.max_subwords, "config.encoder");
    c.encoder.path = resolve(c.encoder.path, base_dir);
  }
  if (c.encoder.kind != "toy" && c.encoder.kind != "pretrained") {
    throw ConfigError("config.encoder.kind: expected toy or pretrained");
  }
  if (c.encoder.kind == "pretrained" && c.encoder.path.empty()) {
    throw ConfigError("config.encoder.path: required for a pretrained encoder");
  }
  if (c.encoder.dim <= 0 || c.encoder.max_subwords < 3) throw ConfigError("config.encoder: out of range");

  if (j.contains("sru")) {
    const auto& s = j["sru"];
    const std::string w = "config.sru";
    check_keys(s, w, {"latent_multiplier", "half_context", "dropout_positions", "dropout_latent", "train_alpha"});
    read(s, "latent_multiplier", c.sru.latent_multiplier, w);
    read(s, "half_context", c.sru.half_context, w);
    read(s, "dropout_positions", c.sru.dropout_positions, w);
    read(s, "dropout_latent", c.sru.dropout_latent, w);
    read(s, "train_alpha", c.sru.train_alpha, w);
  }
  if (c.sru.latent_multiplier <= 0 || c.sru.half_context < 0) throw ConfigError("config.sru: out of range");

  if (j.contains("generator")) {
    const auto& g = j["generator"];
    check_keys(g, "config.generator", {"hidden", "logit_dropout"});
    read(g, "hidden", c.generator.hidden, "config.generator");
    read(g, "logit_dropout", c.generator.logit_dropout, "config.generator");
  }

  if (j.contains("train")) {
    const auto& t = j["train"];
    const std::string w = "config.train";
    check_keys(t, w,
               {"epochs", "early_stop", "batch_size", "grad_clip", "beta1", "beta2", "eps", "encoder_optimizer",
                "head_optimizer", "seed", "target_f1", "eval_train"});
    read(t, "epochs", c.train.epochs, w);
    read(t, "early_stop", c.train.early_stop, w);
    read(t, "batch_size", c.train.batch_size, w);
    read(t, "grad_clip", c.train.grad_clip, w);
    read(t, "beta1", c.train.beta1, w);
    read(t, "beta2", c.train.beta2, w);
    read(t, "eps", c.train.eps, w);
    read(t, "seed", c.train.seed, w);
    read(t, "eval_train", c.train.eval_train, w);
    if (t.contains("target_f1") && !t["target_f1"].is_null()) c.train.target_f1 = t["target_f1"].get<double>();
    if (t.contains("encoder_optimizer")) read_optimizer(t["encoder_optimizer"], c.train.encoder, w + ".encoder_optimizer");
    if (t.contains("head_optimizer")) read_optimizer(t["head_optimizer"], c.train.head, w + ".head_optimizer");
  }
  if (c.train.epochs <= 0 || c.train.early_stop <= 0 || c.train.batch_size <= 0 || !(c.train.grad_clip > 0.0)) {
    throw ConfigError("config.train: out of range");
  }

  read(j, "run_dir", c.run_dir, "config");
  c.run_dir = resolve(c.run_dir, base_dir);
  return c;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path().string());
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json corpora_j = nlohmann::json::array();
  for (const auto& c : corpora) {
    corpora_j.push_back({{"name", c.name},
                         {"format", c.format},
                         {"train", c.train},
                         {"dev", c.dev},
                         {"test", c.test},
                         {"types", c.types}});
  }
  nlohmann::json train_j{{"epochs", train.epochs},
                         {"early_stop", train.early_stop},
                         {"batch_size", train.batch_size},
                         {"grad_clip", train.grad_clip},
                         {"beta1", train.beta1},
                         {"beta2", train.beta2},
                         {"eps", train.eps},
                         {"encoder_optimizer", optimizer_json(train.encoder)},
                         {"head_optimizer", optimizer_json(train.head)},
                         {"seed", train.seed},
                         {"target_f1", train.target_f1 ? nlohmann::json(*train.target_f1) : nlohmann::json(nullptr)},
                         {"eval_train", train.eval_train}};
  return {{"corpora", corpora_j},
          {"encoder",
           {{"kind", encoder.kind}, {"dim", encoder.dim}, {"path", encoder.path}, {"max_subwords", encoder.max_subwords}}},
          {"sru",
           {{"latent_multiplier", sru.latent_multiplier},
            {"half_context", sru.half_context},
            {"dropout_positions", sru.dropout_positions},
            {"dropout_latent", sru.dropout_latent},
            {"train_alpha", sru.train_alpha}}},
          {"generator", {{"hidden", generator.hidden}, {"logit_dropout", generator.logit_dropout}}},
          {"train", train_j},
          {"run_dir", run_dir}};
}

}  // namespace sruner
