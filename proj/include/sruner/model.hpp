#ifndef SRUNER_MODEL_HPP_
#define SRUNER_MODEL_HPP_

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "sruner/config.hpp"
#include "sruner/corpus.hpp"
#include "sruner/encoder.hpp"
#include "sruner/evaluator.hpp"
#include "sruner/generator.hpp"
#include "sruner/gold_matrix.hpp"
#include "sruner/registry.hpp"
#include "sruner/sru.hpp"

namespace sruner {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Prediction {
  DecodeResult decoded;  // disjoint-union labels
  Matrix probabilities;  // sigmoid of the generated logits
  bool truncated = false;
};

// Encoder, SRU and action generator over one label registry.
class NerModel {
 public:
  NerModel(const EncoderConfig& encoder, const SruConfig& sru, const GeneratorConfig& generator,
           LabelRegistry registry, std::uint64_t seed);

  const LabelRegistry& registry() const { return registry_; }
  const ActionVocabulary& vocabulary() const { return vocab_; }
  EncoderAdapter& encoder() { return *encoder_; }
  SruParams& sru() { return sru_; }
  GeneratorParams& generator() { return generator_; }

  std::vector<Parameter*> encoder_parameters();
  // SRU, action embeddings and the scoring head.
  std::vector<Parameter*> head_parameters();
  std::vector<Parameter*> parameters();

  // Teacher-forced loss of one sentence from its source dataset. The
  // augmented gold matrix is copied to `augmented` when given.
  Var sample_loss(Tape& tape, const AnnotatedSentence& sample, const ForwardContext& ctx,
                  GoldActionMatrix* augmented = nullptr);

  Prediction predict(const Sentence& sentence);

  std::vector<Matrix> snapshot() const;
  void restore(const std::vector<Matrix>& values);

  nlohmann::json to_json() const;
  static std::unique_ptr<NerModel> from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static std::unique_ptr<NerModel> load(const std::string& path);

 private:
  NerModel() = default;

  EncoderConfig encoder_config_;
  SruConfig sru_config_;
  GeneratorConfig generator_config_;
  LabelRegistry registry_;
  ActionVocabulary vocab_;
  std::unique_ptr<EncoderAdapter> encoder_;
  SruParams sru_;
  GeneratorParams generator_;
};

// Disjoint output keeps the labels; merged output strips dataset
// prefixes and keeps the best-scoring copy of each (start, end, type).
std::vector<ScoredMention> scenario_mentions(const std::vector<ScoredMention>& disjoint, Scenario scenario);

}  // namespace sruner

#endif  // SRUNER_MODEL_HPP_
