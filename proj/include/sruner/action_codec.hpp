#ifndef SRUNER_ACTION_CODEC_HPP_
#define SRUNER_ACTION_CODEC_HPP_

#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sruner/autograd.hpp"

namespace sruner {

struct Sentence {
  std::vector<std::string> tokens;
  std::optional<std::string> source_dataset;

  int size() const { return static_cast<int>(tokens.size()); }
};

// Inclusive token span [start, end] with an entity type.
struct Mention {
  int start = 0;
  int end = 0;
  std::string type;

  int length() const { return end - start + 1; }
  auto operator<=>(const Mention&) const = default;
};

struct ScoredMention {
  Mention mention;
  double score = 1.0;
};

class CodecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ActionKind { shift, end, transition, reduce };

struct Action {
  ActionKind kind = ActionKind::shift;
  // Entity label index for transition/reduce, -1 otherwise.
  int label = -1;

  static Action shift() { return {ActionKind::shift, -1}; }
  static Action end() { return {ActionKind::end, -1}; }
  static Action transition(int label) { return {ActionKind::transition, label}; }
  static Action reduce(int label) { return {ActionKind::reduce, label}; }

  bool operator==(const Action&) const = default;
};

using ActionSequence = std::vector<Action>;

// The 2M+2 actions over M entity labels. Index layout: SH = 0, EOA = 1,
// TR(e_i) = 2 + 2i, RE(e_i) = 3 + 2i.
class ActionVocabulary {
 public:
  static constexpr int kShift = 0;
  static constexpr int kEnd = 1;

  ActionVocabulary() = default;
  explicit ActionVocabulary(std::vector<std::string> entity_types);

  const std::vector<std::string>& entity_types() const { return types_; }
  int num_types() const { return static_cast<int>(types_.size()); }
  int size() const { return 2 * num_types() + 2; }

  // -1 when unknown.
  int label_index(std::string_view type) const;
  const std::string& label(int index) const { return types_.at(static_cast<std::size_t>(index)); }

  int index_of(const Action& a) const;
  Action action_at(int index) const;
  static int transition_index(int label) { return 2 + 2 * label; }
  static int reduce_index(int label) { return 3 + 2 * label; }

  // Tokens: SH, EOA, TR:<label>, RE:<label>.
  std::string to_string(const Action& a) const;
  Action parse(std::string_view token) const;

  bool operator==(const ActionVocabulary& o) const { return types_ == o.types_; }

 private:
  std::vector<std::string> types_;
  std::unordered_map<std::string, int> index_;
};

std::string format_actions(const ActionSequence& seq, const ActionVocabulary& vocab);
ActionSequence parse_actions(std::string_view text, const ActionVocabulary& vocab);

// Throws CodecError on out-of-range spans, unknown types, duplicates, and
// partially overlapping spans of the same type.
void validate_mentions(int n_tokens, const std::vector<Mention>& mentions, const ActionVocabulary& vocab);

// Canonical action sequence: TR before the SH of the start word, longest
// first; RE after the SH of the end word, shortest first; equal lengths
// ordered by label index; trailing EOA.
ActionSequence encode_mentions(const Sentence& sentence, const std::vector<Mention>& mentions,
                               const ActionVocabulary& vocab);

struct DecodeDiagnostics {
  int ignored_reduces = 0;   // RE with no open span of its type
  int unclosed_spans = 0;    // spans still open at the end
  int empty_spans = 0;       // RE closing a span before any word was shifted into it
  int excess_shifts = 0;     // SH with the cursor already at N
  int rows_consumed = 0;
  bool stopped_on_end = false;

  int total() const { return ignored_reduces + unclosed_spans + empty_spans + excess_shifts; }
};

struct DecodeResult {
  // Sorted by (start, end, type), distinct.
  std::vector<ScoredMention> mentions;
  DecodeDiagnostics diagnostics;

  std::vector<Mention> plain() const;
};

DecodeResult decode_actions(const ActionSequence& seq, int n_tokens, const ActionVocabulary& vocab);
inline DecodeResult decode_actions(const ActionSequence& seq, const Sentence& s, const ActionVocabulary& vocab) {
  return decode_actions(seq, s.size(), vocab);
}

// probs: one row per step, one column per action, values in [0, 1].
// A row whose arg max is EOA stops decoding. Otherwise every RE then every
// TR with probability > 0.5 is applied, and the cursor advances when SH is
// the arg max. Span scores are the mean of the opening and closing
// probabilities.
DecodeResult decode_probabilities(const Matrix& probs, int n_tokens, const ActionVocabulary& vocab);
inline DecodeResult decode_probabilities(const Matrix& probs, const Sentence& s, const ActionVocabulary& vocab) {
  return decode_probabilities(probs, s.size(), vocab);
}

// Index of the largest entry, first on ties.
int argmax(const Eigen::Ref<const Matrix>& row);

}  // namespace sruner

#endif  // SRUNER_ACTION_CODEC_HPP_
