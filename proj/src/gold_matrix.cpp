#include "sruner/gold_matrix.hpp"

#include <algorithm>
#include <stdexcept>

namespace sruner {

Matrix pack_actions(const ActionSequence& seq, const ActionVocabulary& vocab) {
  std::vector<std::vector<int>> rows;
  ActionKind open_kind = ActionKind::shift;
  bool run_open = false;
  for (const Action& a : seq) {
    int col = vocab.index_of(a);
    if (a.kind == ActionKind::shift || a.kind == ActionKind::end) {
      rows.push_back({col});
      run_open = false;
      continue;
    }
    bool extend = run_open && open_kind == a.kind;
    if (extend) {
      for (int c : rows.back()) {
        if (c == col) extend = false;
      }
    }
    if (extend) {
      rows.back().push_back(col);
    } else {
      rows.push_back({col});
      run_open = true;
      open_kind = a.kind;
    }
  }
  Matrix g = Matrix::Zero(static_cast<Index>(rows.size()), vocab.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (int c : rows[t]) g(static_cast<Index>(t), c) = 1.0;
  }
  return g;
}

GoldActionMatrix build_gold_matrix(const Sentence& sentence, const std::vector<Mention>& mentions,
                                   const LabelRegistry& registry) {
  if (!sentence.source_dataset) throw RegistryError("sentence has no source dataset");
  const std::string& dataset = *sentence.source_dataset;
  const auto& own = registry.types_of(dataset);
  std::vector<Mention> labelled;
  labelled.reserve(mentions.size());
  for (const Mention& m : mentions) {
    if (std::find(own.begin(), own.end(), m.type) == own.end()) {
      throw RegistryError("type '" + m.type + "' is not declared for dataset '" + dataset + "'");
    }
    labelled.push_back({m.start, m.end, LabelRegistry::disjoint_label(dataset, m.type)});
  }
  ActionVocabulary vocab = registry.vocabulary();
  GoldActionMatrix g;
  g.values = pack_actions(encode_mentions(sentence, labelled, vocab), vocab);
  g.in_task = registry.task_columns(dataset);
  g.inserted.assign(static_cast<std::size_t>(g.rows()), false);
  return g;
}

bool augment_gold(GoldActionMatrix& gold, const Eigen::Ref<const Matrix>& logits_row, int t, int max_rows) {
  if (t < 0 || t >= gold.rows()) throw std::out_of_range("augment_gold: row out of range");
  if (logits_row.cols() != gold.cols()) throw std::invalid_argument("augment_gold: width mismatch");
  const int sh = ActionVocabulary::kShift;
  bool delay = false;
  for (int a = 0; a < gold.cols(); ++a) {
    if (gold.in_task[static_cast<std::size_t>(a)]) continue;
    gold.values(t, a) = sigmoid(logits_row(0, a));
    if (logits_row(0, a) > logits_row(0, sh)) delay = true;
  }
  if (!delay || !gold.is_shift_row(t) || gold.rows() >= max_rows) return false;

  gold.values(t, sh) = sigmoid(logits_row(0, sh));
  Matrix grown(gold.rows() + 1, gold.cols());
  grown.topRows(t + 1) = gold.values.topRows(t + 1);
  grown.row(t + 1).setZero();
  grown(t + 1, sh) = 1.0;
  grown.bottomRows(gold.rows() - t - 1) = gold.values.bottomRows(gold.rows() - t - 1);
  gold.values = std::move(grown);
  gold.inserted.insert(gold.inserted.begin() + t + 1, true);
  return true;
}

Var sample_loss(Var logits, const GoldActionMatrix& gold) {
  if (logits.rows() != gold.rows() || logits.cols() != gold.cols()) {
    throw std::invalid_argument("sample_loss: logits are " + std::to_string(logits.rows()) + "x" +
                                std::to_string(logits.cols()) + ", gold is " + std::to_string(gold.rows()) + "x" +
                                std::to_string(gold.cols()));
  }
  // Every row has the same width, so the mean of row means is the mean of
  // all cells.
  return bce_with_logits_mean(logits, gold.values);
}

}  // namespace sruner
