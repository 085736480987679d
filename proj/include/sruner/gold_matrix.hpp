#ifndef SRUNER_GOLD_MATRIX_HPP_
#define SRUNER_GOLD_MATRIX_HPP_

#include <string>
#include <vector>

#include "sruner/action_codec.hpp"
#include "sruner/autograd.hpp"
#include "sruner/registry.hpp"

namespace sruner {

// Per-step supervision over the disjoint-union action vocabulary.
struct GoldActionMatrix {
  Matrix values;               // T x |actions|, entries in [0, 1]
  std::vector<bool> in_task;   // per column
  std::vector<bool> inserted;  // per row, true for SH-delay rows added by augment_gold

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
  bool is_shift_row(int t) const { return values(t, ActionVocabulary::kShift) == 1.0; }
};

// Packs an action sequence into multi-hot rows: each SH and the EOA get
// their own row; consecutive TR actions share a row, as do consecutive
// RE actions, unless the same action would appear twice in one row.
Matrix pack_actions(const ActionSequence& seq, const ActionVocabulary& vocab);

// `mentions` carry the source dataset's own type names; the sentence's
// source_dataset selects the dataset in the registry.
GoldActionMatrix build_gold_matrix(const Sentence& sentence, const std::vector<Mention>& mentions,
                                   const LabelRegistry& registry);

// Softens row t with the model's logits for that step: every out-of-task
// cell becomes sigmoid(u). When row t is a gold SH and some out-of-task
// logit beats u_SH, the SH cell becomes sigmoid(u_SH) and a one-hot SH row
// is inserted after t. No insertion happens once the matrix has
// `max_rows` rows. Returns true when a row was inserted.
bool augment_gold(GoldActionMatrix& gold, const Eigen::Ref<const Matrix>& logits_row, int t, int max_rows);

// Mean over rows of the per-row mean binary cross entropy; gold is a
// constant. Throws std::invalid_argument on a row count mismatch.
Var sample_loss(Var logits, const GoldActionMatrix& gold);

}  // namespace sruner

#endif  // SRUNER_GOLD_MATRIX_HPP_
