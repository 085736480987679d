#include "sruner/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sruner {

namespace {

Matrix xavier(Index rows, Index cols, std::mt19937_64& rng) {
  double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

Matrix gaussian(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  }
  return m;
}

}  // namespace

GeneratorParams::GeneratorParams(int dim, int num_actions, const GeneratorConfig& config, std::mt19937_64& rng)
    : dropout(config.logit_dropout) {
  const int hidden = config.hidden > 0 ? config.hidden : dim;
  action_embeddings = Parameter("generator.action_embeddings", gaussian(num_actions, dim, 0.3, rng));
  boa = Parameter("generator.boa", gaussian(1, dim, 1.0, rng));
  w1 = Parameter("generator.w1", xavier(2 * dim, hidden, rng));
  b1 = Parameter("generator.b1", Matrix::Zero(1, hidden));
  w2 = Parameter("generator.w2", xavier(hidden, num_actions, rng));
  b2 = Parameter("generator.b2", Matrix::Zero(1, num_actions));
}

int word_cursor(const Matrix& logits_prefix) {
  int count = 0;
  for (Index t = 0; t < logits_prefix.rows(); ++t) {
    if (argmax(logits_prefix.row(t)) == ActionVocabulary::kShift) ++count;
  }
  return count;
}

Var gated_action_mixture(Var logits_row, GeneratorParams& params) {
  const Matrix& u = logits_row.value();
  if (u.rows() != 1 || u.cols() != params.action_embeddings.value().rows()) {
    throw std::invalid_argument("gated_action_mixture: logits width does not match the action count");
  }
  const double shift = u(0, ActionVocabulary::kShift);
  Matrix gate(1, u.cols());
  for (Index a = 0; a < u.cols(); ++a) gate(0, a) = u(0, a) >= shift ? 1.0 : 0.0;
  return matmul(mask(logits_row, gate), logits_row.tape()->param(params.action_embeddings));
}

StepResult step_logits(const EncodedSentence& encoded, const SruState& state, int cursor, Var omega_prev,
                       GeneratorParams& gen, SruParams& sru, const ForwardContext& ctx) {
  if (cursor < 0 || cursor > encoded.n_tokens) throw std::out_of_range("step_logits: cursor out of range");
  Tape& tape = *encoded.matrix.tape();
  SruState next = sru_update(state, omega_prev, cursor);
  Var h = sru_output(next, cursor, sru, ctx).h;
  Var x = concat_cols(row(encoded.matrix, cursor + 1), h);
  x = mask(x, dropout_mask(x.rows(), x.cols(), gen.dropout, ctx));
  Var hidden = tanh(add_rows(matmul(x, tape.param(gen.w1)), tape.param(gen.b1)));
  Var logits = add_rows(matmul(hidden, tape.param(gen.w2)), tape.param(gen.b2));
  return {logits, next};
}

int max_generation_steps(int n_tokens) { return 8 * n_tokens + 16; }

Generation generate(const EncodedSentence& encoded, GeneratorParams& gen, SruParams& sru, GenerationMode mode,
                    const GoldActionMatrix* gold, const ForwardContext& ctx) {
  Tape& tape = *encoded.matrix.tape();
  const int n = encoded.n_tokens;
  const int cap = max_generation_steps(n);
  Generation out;
  SruState state{encoded.matrix};
  Var omega = tape.param(gen.boa);
  int cursor = 0;
  std::vector<Var> rows;

  if (mode == GenerationMode::training) {
    if (gold == nullptr) throw std::invalid_argument("generate: training mode needs a gold matrix");
    out.gold = *gold;
    for (int t = 0; t < out.gold.rows(); ++t) {
      StepResult step = step_logits(encoded, state, cursor, omega, gen, sru, ctx);
      augment_gold(out.gold, step.logits.value(), t, std::max(cap, gold->rows()));
      rows.push_back(step.logits);
      out.cursors.push_back(cursor);
      if (out.gold.is_shift_row(t) && cursor < n) ++cursor;
      omega = gated_action_mixture(step.logits, gen);
      state = step.state;
    }
  } else {
    for (int t = 0; t < cap; ++t) {
      StepResult step = step_logits(encoded, state, cursor, omega, gen, sru, ctx);
      rows.push_back(step.logits);
      out.cursors.push_back(cursor);
      const Matrix& u = step.logits.value();
      if (sigmoid(u(0, ActionVocabulary::kEnd)) > 0.5) break;
      if (argmax(u) == ActionVocabulary::kShift && cursor < n) ++cursor;
      omega = gated_action_mixture(step.logits, gen);
      state = step.state;
    }
    const Matrix& last = rows.back().value();
    out.truncated = static_cast<int>(rows.size()) == cap && !(sigmoid(last(0, ActionVocabulary::kEnd)) > 0.5);
  }
  out.logits = stack_rows(rows);
  return out;
}

}  // namespace sruner
