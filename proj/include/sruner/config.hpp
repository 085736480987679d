#ifndef SRUNER_CONFIG_HPP_
#define SRUNER_CONFIG_HPP_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sruner/generator.hpp"
#include "sruner/sru.hpp"

namespace sruner {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CorpusConfig {
  std::string name;
  std::string format = "nested";  // "nested" or "bio"
  std::string train;
  std::string dev;
  std::string test;  // optional
  // Declared types; when empty, the types seen in the files are used.
  std::vector<std::string> types;
};

struct EncoderConfig {
  std::string kind = "toy";  // "toy" or "pretrained"
  int dim = 64;              // toy only
  std::string path;          // pretrained embedding file
  int max_subwords = 405;
};

struct OptimizerConfig {
  double lr = 3e-4;
  double weight_decay = 1e-3;
  double warmup_epochs = 0.5;
};

struct TrainConfig {
  int epochs = 100;
  int early_stop = 30;
  int batch_size = 16;
  double grad_clip = 1.0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
  OptimizerConfig encoder{2e-5, 1e-3, 1.0};
  OptimizerConfig head{3e-4, 1e-3, 0.5};
  std::uint64_t seed = 42;
  // Stop as soon as dev merged micro-F1 reaches this value.
  std::optional<double> target_f1;
  // Also score the train split after every epoch (extra metrics lines).
  bool eval_train = false;
};

struct RunConfig {
  std::vector<CorpusConfig> corpora;
  EncoderConfig encoder;
  SruConfig sru;
  GeneratorConfig generator;
  TrainConfig train;
  std::string run_dir = "runs/default";

  // Missing keys take the defaults above. A top-level "preset": "genia"
  // switches to the single-task GENIA column before explicit keys apply.
  // Relative paths are resolved against base_dir.
  static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
  static RunConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

// Defaults of the GENIA column: multiplier 10, half-context 240,
// encoder lr 3e-5 and a trainable alpha.
RunConfig genia_preset();

}  // namespace sruner

#endif  // SRUNER_CONFIG_HPP_
