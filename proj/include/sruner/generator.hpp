#ifndef SRUNER_GENERATOR_HPP_
#define SRUNER_GENERATOR_HPP_

#include <random>
#include <vector>

#include "sruner/autograd.hpp"
#include "sruner/encoder.hpp"
#include "sruner/gold_matrix.hpp"
#include "sruner/sru.hpp"

namespace sruner {

struct GeneratorConfig {
  // 0 means d_enc.
  int hidden = 0;
  double logit_dropout = 0.1;
};

// Action embeddings, the begin-of-actions embedding and the two-layer
// head: dropout, affine 2d -> hidden, tanh, affine hidden -> |actions|.
struct GeneratorParams {
  Parameter action_embeddings;  // |actions| x d
  Parameter boa;                // 1 x d
  Parameter w1;                 // 2d x hidden
  Parameter b1;                 // 1 x hidden
  Parameter w2;                 // hidden x |actions|
  Parameter b2;                 // 1 x |actions|
  double dropout = 0.0;

  GeneratorParams() = default;
  GeneratorParams(int dim, int num_actions, const GeneratorConfig& config, std::mt19937_64& rng);

  int num_actions() const { return static_cast<int>(w2.value().cols()); }
  std::vector<Parameter*> parameters() { return {&action_embeddings, &boa, &w1, &b1, &w2, &b2}; }
};

// Number of rows whose arg max is SH.
int word_cursor(const Matrix& logits_prefix);

// Omega = sum_a beta_a * emb(a), beta_a = u_a when u_a >= u_SH, else 0.
Var gated_action_mixture(Var logits_row, GeneratorParams& params);

struct StepResult {
  Var logits;  // 1 x |actions|
  SruState state;
};

// Adds omega_prev to slot `cursor`, reads the SRU summary, and scores the
// actions from [S_{cursor+1}, h].
StepResult step_logits(const EncodedSentence& encoded, const SruState& state, int cursor, Var omega_prev,
                       GeneratorParams& gen, SruParams& sru, const ForwardContext& ctx);

enum class GenerationMode { inference, training };

struct Generation {
  Var logits;  // T x |actions|
  std::vector<int> cursors;  // cursor used at each step
  bool truncated = false;    // inference hit the step cap
  GoldActionMatrix gold;     // augmented copy, training mode only
};

// Inference step cap: 8N + 16.
int max_generation_steps(int n_tokens);

// Inference stops at the first step with sigmoid(u_EOA) > 0.5 or at the
// cap. Training follows the gold SH schedule (teacher forcing), augments
// the gold rows as it goes, and stops after the last gold row.
Generation generate(const EncodedSentence& encoded, GeneratorParams& gen, SruParams& sru, GenerationMode mode,
                    const GoldActionMatrix* gold, const ForwardContext& ctx);

}  // namespace sruner

#endif  // SRUNER_GENERATOR_HPP_
