#include "sruner/action_codec.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace sruner {

ActionVocabulary::ActionVocabulary(std::vector<std::string> entity_types) : types_(std::move(entity_types)) {
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i].empty()) throw CodecError("empty entity type name");
    if (!index_.emplace(types_[i], static_cast<int>(i)).second) {
      throw CodecError("duplicate entity type '" + types_[i] + "'");
    }
  }
}

int ActionVocabulary::label_index(std::string_view type) const {
  auto it = index_.find(std::string(type));
  return it == index_.end() ? -1 : it->second;
}

int ActionVocabulary::index_of(const Action& a) const {
  switch (a.kind) {
    case ActionKind::shift:
      return kShift;
    case ActionKind::end:
      return kEnd;
    case ActionKind::transition:
    case ActionKind::reduce:
      if (a.label < 0 || a.label >= num_types()) throw CodecError("action label out of range");
      return a.kind == ActionKind::transition ? transition_index(a.label) : reduce_index(a.label);
  }
  throw CodecError("bad action kind");
}

Action ActionVocabulary::action_at(int index) const {
  if (index < 0 || index >= size()) throw CodecError("action index out of range");
  if (index == kShift) return Action::shift();
  if (index == kEnd) return Action::end();
  int label = (index - 2) / 2;
  return (index % 2 == 0) ? Action::transition(label) : Action::reduce(label);
}

std::string ActionVocabulary::to_string(const Action& a) const {
  switch (a.kind) {
    case ActionKind::shift:
      return "SH";
    case ActionKind::end:
      return "EOA";
    case ActionKind::transition:
      return "TR:" + label(a.label);
    case ActionKind::reduce:
      return "RE:" + label(a.label);
  }
  return {};
}

Action ActionVocabulary::parse(std::string_view token) const {
  if (token == "SH") return Action::shift();
  if (token == "EOA") return Action::end();
  if (token.size() > 3 && (token.substr(0, 3) == "TR:" || token.substr(0, 3) == "RE:")) {
    int label = label_index(token.substr(3));
    if (label < 0) throw CodecError("unknown entity type in action '" + std::string(token) + "'");
    return token[0] == 'T' ? Action::transition(label) : Action::reduce(label);
  }
  throw CodecError("malformed action token '" + std::string(token) + "'");
}

std::string format_actions(const ActionSequence& seq, const ActionVocabulary& vocab) {
  std::string out;
  for (const Action& a : seq) {
    if (!out.empty()) out += ' ';
    out += vocab.to_string(a);
  }
  return out;
}

ActionSequence parse_actions(std::string_view text, const ActionVocabulary& vocab) {
  ActionSequence seq;
  std::istringstream in{std::string(text)};
  std::string tok;
  while (in >> tok) seq.push_back(vocab.parse(tok));
  return seq;
}

void validate_mentions(int n_tokens, const std::vector<Mention>& mentions, const ActionVocabulary& vocab) {
  std::set<std::tuple<int, int, std::string>> seen;
  for (const Mention& m : mentions) {
    if (m.start < 0 || m.end < m.start || m.end >= n_tokens) {
      throw CodecError("span [" + std::to_string(m.start) + "," + std::to_string(m.end) + "] out of range for " +
                       std::to_string(n_tokens) + " tokens");
    }
    if (vocab.label_index(m.type) < 0) throw CodecError("unknown entity type '" + m.type + "'");
    if (!seen.emplace(m.start, m.end, m.type).second) {
      throw CodecError("duplicate mention " + m.type + "[" + std::to_string(m.start) + "," + std::to_string(m.end) + "]");
    }
  }
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    for (std::size_t j = 0; j < mentions.size(); ++j) {
      const Mention& a = mentions[i];
      const Mention& b = mentions[j];
      if (i == j || a.type != b.type) continue;
      if (a.start < b.start && b.start <= a.end && a.end < b.end) {
        throw CodecError("crossing " + a.type + " spans [" + std::to_string(a.start) + "," + std::to_string(a.end) +
                         "] and [" + std::to_string(b.start) + "," + std::to_string(b.end) + "]");
      }
    }
  }
}

ActionSequence encode_mentions(const Sentence& sentence, const std::vector<Mention>& mentions,
                               const ActionVocabulary& vocab) {
  const int n = sentence.size();
  if (n == 0) throw CodecError("cannot encode an empty sentence");
  validate_mentions(n, mentions, vocab);

  std::vector<std::vector<const Mention*>> opening(static_cast<std::size_t>(n));
  std::vector<std::vector<const Mention*>> closing(static_cast<std::size_t>(n));
  for (const Mention& m : mentions) {
    opening[static_cast<std::size_t>(m.start)].push_back(&m);
    closing[static_cast<std::size_t>(m.end)].push_back(&m);
  }

  ActionSequence seq;
  seq.reserve(static_cast<std::size_t>(n) + 2 * mentions.size() + 1);
  for (int i = 0; i < n; ++i) {
    auto& opens = opening[static_cast<std::size_t>(i)];
    std::sort(opens.begin(), opens.end(), [&](const Mention* a, const Mention* b) {
      if (a->length() != b->length()) return a->length() > b->length();
      return vocab.label_index(a->type) < vocab.label_index(b->type);
    });
    for (const Mention* m : opens) seq.push_back(Action::transition(vocab.label_index(m->type)));

    seq.push_back(Action::shift());

    auto& closes = closing[static_cast<std::size_t>(i)];
    std::sort(closes.begin(), closes.end(), [&](const Mention* a, const Mention* b) {
      if (a->length() != b->length()) return a->length() < b->length();
      return vocab.label_index(a->type) < vocab.label_index(b->type);
    });
    for (const Mention* m : closes) seq.push_back(Action::reduce(vocab.label_index(m->type)));
  }
  seq.push_back(Action::end());
  return seq;
}

std::vector<Mention> DecodeResult::plain() const {
  std::vector<Mention> out;
  out.reserve(mentions.size());
  for (const auto& m : mentions) out.push_back(m.mention);
  return out;
}

namespace {

// Per-type stacks of open spans.
class SpanBuilder {
 public:
  SpanBuilder(int n_tokens, const ActionVocabulary& vocab)
      : n_(n_tokens), vocab_(vocab), open_(static_cast<std::size_t>(vocab.num_types())) {}

  void transition(int label, double score) { open_[static_cast<std::size_t>(label)].push_back({cursor_, score}); }

  void reduce(int label, double score) {
    auto& stack = open_[static_cast<std::size_t>(label)];
    if (stack.empty()) {
      ++diag_.ignored_reduces;
      return;
    }
    OpenSpan s = stack.back();
    stack.pop_back();
    int end = cursor_ - 1;
    if (end < s.start) {
      ++diag_.empty_spans;
      return;
    }
    Mention m{s.start, end, vocab_.label(label)};
    double sc = 0.5 * (s.score + score);
    auto it = closed_.find(m);
    if (it == closed_.end()) {
      closed_.emplace(std::move(m), sc);
    } else {
      it->second = std::max(it->second, sc);
    }
  }

  void shift() {
    if (cursor_ >= n_) {
      ++diag_.excess_shifts;
      return;
    }
    ++cursor_;
  }

  DecodeResult finish() {
    for (const auto& stack : open_) diag_.unclosed_spans += static_cast<int>(stack.size());
    DecodeResult r;
    r.diagnostics = diag_;
    for (auto& [m, sc] : closed_) r.mentions.push_back({m, sc});
    return r;
  }

  DecodeDiagnostics& diagnostics() { return diag_; }

 private:
  struct OpenSpan {
    int start;
    double score;
  };

  int n_;
  int cursor_ = 0;
  const ActionVocabulary& vocab_;
  std::vector<std::vector<OpenSpan>> open_;
  std::map<Mention, double> closed_;
  DecodeDiagnostics diag_;
};

}  // namespace

DecodeResult decode_actions(const ActionSequence& seq, int n_tokens, const ActionVocabulary& vocab) {
  SpanBuilder b(n_tokens, vocab);
  for (const Action& a : seq) {
    ++b.diagnostics().rows_consumed;
    if (a.kind == ActionKind::end) {
      b.diagnostics().stopped_on_end = true;
      break;
    }
    switch (a.kind) {
      case ActionKind::shift:
        b.shift();
        break;
      case ActionKind::transition:
        b.transition(a.label, 1.0);
        break;
      case ActionKind::reduce:
        b.reduce(a.label, 1.0);
        break;
      case ActionKind::end:
        break;
    }
  }
  return b.finish();
}

int argmax(const Eigen::Ref<const Matrix>& row) {
  int best = 0;
  for (Index j = 1; j < row.size(); ++j) {
    if (row(0, j) > row(0, best)) best = static_cast<int>(j);
  }
  return best;
}

DecodeResult decode_probabilities(const Matrix& probs, int n_tokens, const ActionVocabulary& vocab) {
  if (probs.rows() > 0 && probs.cols() != vocab.size()) {
    throw CodecError("probability rows have " + std::to_string(probs.cols()) + " columns, vocabulary has " +
                     std::to_string(vocab.size()));
  }
  SpanBuilder b(n_tokens, vocab);
  const int m = vocab.num_types();
  for (Index t = 0; t < probs.rows(); ++t) {
    ++b.diagnostics().rows_consumed;
    auto r = probs.row(t);
    int best = argmax(r);
    if (best == ActionVocabulary::kEnd) {
      b.diagnostics().stopped_on_end = true;
      break;
    }
    for (int e = 0; e < m; ++e) {
      double p = r(ActionVocabulary::reduce_index(e));
      if (p > 0.5) b.reduce(e, p);
    }
    for (int e = 0; e < m; ++e) {
      double p = r(ActionVocabulary::transition_index(e));
      if (p > 0.5) b.transition(e, p);
    }
    if (best == ActionVocabulary::kShift) b.shift();
  }
  return b.finish();
}

}  // namespace sruner
