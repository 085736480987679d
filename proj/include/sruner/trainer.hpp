#ifndef SRUNER_TRAINER_HPP_
#define SRUNER_TRAINER_HPP_

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sruner/config.hpp"
#include "sruner/corpus.hpp"
#include "sruner/evaluator.hpp"
#include "sruner/model.hpp"

namespace sruner {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Picks dataset i with probability proportional to 1/|D_i|, then a
// uniform sentence from it. One epoch is the mean dataset size, rounded
// to the nearest integer.
class DatasetSampler {
 public:
  DatasetSampler(std::vector<std::size_t> sizes, std::uint64_t seed);

  const std::vector<double>& probabilities() const { return probabilities_; }
  std::size_t epoch_length() const { return epoch_length_; }

  // (dataset index, sentence index)
  std::pair<std::size_t, std::size_t> draw();
  std::vector<std::pair<std::size_t, std::size_t>> epoch();

 private:
  std::vector<std::size_t> sizes_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
  std::size_t epoch_length_ = 0;
  std::mt19937_64 rng_;
};

// Decoupled weight decay Adam over one parameter group. Frozen
// parameters are skipped.
class AdamW {
 public:
  AdamW(std::vector<Parameter*> params, double weight_decay, double beta1, double beta2, double eps);
  void step(double lr);
  long steps() const { return steps_; }

 private:
  std::vector<Parameter*> params_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  double weight_decay_;
  double beta1_;
  double beta2_;
  double eps_;
  long steps_ = 0;
};

// Linear warm-up over the first `warmup` steps, constant afterwards.
// `step` counts from 1.
double scheduled_lr(double base, long step, long warmup);

// Scales all gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm);

LabelRegistry registry_for(const std::vector<DatasetSpec>& datasets);

// Predicts every sentence of `split` and scores it against the dataset's
// own gold mentions.
EvalReport evaluate_split(NerModel& model, const Split& split, const std::string& dataset, Scenario scenario);

struct EpochMetrics {
  int epoch = 0;
  std::string split;  // "dev" or "train"
  MatchCounts counts;
  double loss = 0.0;  // mean training sample loss of the epoch
};

// `epoch,split,micro_P,micro_R,micro_F1,loss`
std::string metrics_csv_header();
std::string metrics_csv_line(const EpochMetrics& m);

struct TrainResult {
  std::vector<EpochMetrics> history;
  int best_epoch = 0;
  double best_f1 = -1.0;
  int epochs_run = 0;
  std::vector<std::string> warnings;
};

using MetricsSink = std::function<void(const EpochMetrics&)>;

// Trains on the train splits; selects the epoch with the best merged
// micro-F1 summed over all dev splits and leaves those weights in the
// model. Sentences that cannot be encoded are skipped with a warning.
// Throws TrainingError on a non-finite loss.
TrainResult train(NerModel& model, const std::vector<DatasetSpec>& datasets, const TrainConfig& config,
                  const MetricsSink& sink = {});

}  // namespace sruner

#endif  // SRUNER_TRAINER_HPP_
