#include "sruner/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace sruner {

DatasetSampler::DatasetSampler(std::vector<std::size_t> sizes, std::uint64_t seed)
    : sizes_(std::move(sizes)), rng_(seed) {
  if (sizes_.empty()) throw std::invalid_argument("sampler needs at least one dataset");
  double total = 0.0;
  for (std::size_t s : sizes_) {
    if (s == 0) throw std::invalid_argument("sampler: empty dataset");
    total += 1.0 / static_cast<double>(s);
  }
  double acc = 0.0;
  for (std::size_t s : sizes_) {
    probabilities_.push_back(1.0 / static_cast<double>(s) / total);
    acc += probabilities_.back();
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
  const double mean =
      static_cast<double>(std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0})) / static_cast<double>(sizes_.size());
  epoch_length_ = static_cast<std::size_t>(std::llround(mean));
}

std::pair<std::size_t, std::size_t> DatasetSampler::draw() {
  const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const std::size_t d = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), sizes_.size() - 1);
  std::uniform_int_distribution<std::size_t> pick(0, sizes_[d] - 1);
  return {d, pick(rng_)};
}

std::vector<std::pair<std::size_t, std::size_t>> DatasetSampler::epoch() {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(epoch_length_);
  for (std::size_t i = 0; i < epoch_length_; ++i) out.push_back(draw());
  return out;
}

AdamW::AdamW(std::vector<Parameter*> params, double weight_decay, double beta1, double beta2, double eps)
    : params_(std::move(params)), weight_decay_(weight_decay), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (Parameter* p : params_) {
    m_.push_back(Matrix::Zero(p->value().rows(), p->value().cols()));
    v_.push_back(Matrix::Zero(p->value().rows(), p->value().cols()));
  }
}

void AdamW::step(double lr) {
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (!p.trainable()) continue;
    const Matrix& g = p.grad();
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    p.value() *= 1.0 - lr * weight_decay_;
    p.value().array() -= lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

double scheduled_lr(double base, long step, long warmup) {
  if (warmup > 0 && step < warmup) return base * static_cast<double>(step) / static_cast<double>(warmup);
  return base;
}

double clip_grad_norm(const std::vector<Parameter*>& params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    if (p->trainable()) sq += p->grad().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double s = max_norm / (norm + 1e-12);
    for (Parameter* p : params) {
      if (p->trainable()) p->grad() *= s;
    }
  }
  return norm;
}

LabelRegistry registry_for(const std::vector<DatasetSpec>& datasets) {
  std::vector<DatasetTypes> dt;
  for (const auto& d : datasets) dt.push_back({d.name, d.types});
  return LabelRegistry(std::move(dt));
}

EvalReport evaluate_split(NerModel& model, const Split& split, const std::string& dataset, Scenario scenario) {
  std::vector<EvalItem> items;
  items.reserve(split.size());
  for (const auto& s : split) {
    EvalItem item;
    item.gold = s.mentions;
    if (!s.sentence.tokens.empty()) {
      try {
        item.predicted = model.predict(s.sentence).decoded.plain();
      } catch (const EncoderError&) {
        // Over-long sentence: scored with no predictions.
      }
    }
    items.push_back(std::move(item));
  }
  return evaluate(scenario, items, dataset, model.registry());
}

std::string metrics_csv_header() { return "epoch,split,micro_P,micro_R,micro_F1,loss"; }

std::string metrics_csv_line(const EpochMetrics& m) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f,%.6f,%.17g", m.epoch, m.split.c_str(), m.counts.precision(),
                m.counts.recall(), m.counts.f1(), m.loss);
  return buf;
}

namespace {

struct PreparedDataset {
  std::string name;
  Split train;
};

std::vector<PreparedDataset> prepare(NerModel& model, const std::vector<DatasetSpec>& datasets,
                                     std::vector<std::string>& warnings) {
  std::vector<PreparedDataset> out;
  for (const auto& d : datasets) {
    PreparedDataset p{d.name, {}};
    for (std::size_t i = 0; i < d.train.size(); ++i) {
      AnnotatedSentence s = d.train[i];
      s.sentence.source_dataset = d.name;
      try {
        if (s.sentence.tokens.empty()) throw EncoderError("empty sentence");
        build_gold_matrix(s.sentence, s.mentions, model.registry());
        const auto pieces = model.encoder().tokenize(s.sentence.tokens);
        if (static_cast<int>(pieces.ids.size()) > model.encoder().max_subwords()) {
          throw EncoderError("exceeds the encoder window");
        }
      } catch (const std::exception& e) {
        warnings.push_back(d.name + " train sentence " + std::to_string(i) + " skipped: " + e.what());
        continue;
      }
      p.train.push_back(std::move(s));
    }
    if (p.train.empty()) throw TrainingError("dataset '" + d.name + "' has no usable training sentences");
    out.push_back(std::move(p));
  }
  return out;
}

MatchCounts merged_counts(NerModel& model, const std::vector<DatasetSpec>& datasets, bool train_split) {
  MatchCounts total;
  for (const auto& d : datasets) {
    total += evaluate_split(model, train_split ? d.train : d.dev, d.name, Scenario::merged).total;
  }
  return total;
}

}  // namespace

TrainResult train(NerModel& model, const std::vector<DatasetSpec>& datasets, const TrainConfig& config,
                  const MetricsSink& sink) {
  if (datasets.empty()) throw TrainingError("no datasets to train on");
  TrainResult result;
  const auto prepared = prepare(model, datasets, result.warnings);

  std::vector<std::size_t> sizes;
  for (const auto& p : prepared) sizes.push_back(p.train.size());
  DatasetSampler sampler(sizes, config.seed + 1);
  std::mt19937_64 dropout_rng(config.seed + 2);
  ForwardContext ctx{true, &dropout_rng};

  const long batch = config.batch_size;
  const long steps_per_epoch =
      std::max<long>(1, (static_cast<long>(sampler.epoch_length()) + batch - 1) / batch);
  const long enc_warmup = std::lround(config.encoder.warmup_epochs * static_cast<double>(steps_per_epoch));
  const long head_warmup = std::lround(config.head.warmup_epochs * static_cast<double>(steps_per_epoch));

  auto enc_params = model.encoder_parameters();
  auto head_params = model.head_parameters();
  auto all_params = model.parameters();
  AdamW enc_opt(enc_params, config.encoder.weight_decay, config.beta1, config.beta2, config.eps);
  AdamW head_opt(head_params, config.head.weight_decay, config.beta1, config.beta2, config.eps);

  std::vector<Matrix> best = model.snapshot();
  long step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto draws = sampler.epoch();
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < draws.size(); begin += static_cast<std::size_t>(batch)) {
      const std::size_t end = std::min(draws.size(), begin + static_cast<std::size_t>(batch));
      for (Parameter* p : all_params) p->zero_grad();
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t k = begin; k < end; ++k) {
        const auto& sample = prepared[draws[k].first].train[draws[k].second];
        Tape tape;
        Var loss = model.sample_loss(tape, sample, ctx);
        const double value = loss.scalar();
        if (!std::isfinite(value)) {
          throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + " on a " +
                              prepared[draws[k].first].name + " sentence");
        }
        loss_sum += value;
        tape.backward(scale(loss, inv));
      }
      clip_grad_norm(all_params, config.grad_clip);
      ++step;
      enc_opt.step(scheduled_lr(config.encoder.lr, step, enc_warmup));
      head_opt.step(scheduled_lr(config.head.lr, step, head_warmup));
    }
    const double epoch_loss = loss_sum / static_cast<double>(std::max<std::size_t>(1, draws.size()));
    result.epochs_run = epoch;

    EpochMetrics dev{epoch, "dev", merged_counts(model, datasets, false), epoch_loss};
    result.history.push_back(dev);
    if (sink) sink(dev);
    if (config.eval_train) {
      EpochMetrics tr{epoch, "train", merged_counts(model, datasets, true), epoch_loss};
      result.history.push_back(tr);
      if (sink) sink(tr);
    }

    const double f1 = dev.counts.f1();
    if (f1 > result.best_f1) {
      result.best_f1 = f1;
      result.best_epoch = epoch;
      best = model.snapshot();
    }
    if (config.target_f1 && f1 >= *config.target_f1) break;
    if (epoch - result.best_epoch >= config.early_stop) break;
  }
  model.restore(best);
  return result;
}

}  // namespace sruner
