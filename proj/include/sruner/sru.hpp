#ifndef SRUNER_SRU_HPP_
#define SRUNER_SRU_HPP_

#include <cstdint>
#include <vector>

#include "sruner/autograd.hpp"

namespace sruner {

struct SruConfig {
  int latent_multiplier = 2;
  int half_context = 150;
  double dropout_positions = 0.2;
  double dropout_latent = 0.2;
  bool train_alpha = false;
};

// Trainable pieces of the slot-based recurrent unit.
//   d1, d2:     1 x d diagonals of the two diagonal maps
//   latent:     J x d latent embeddings, J a multiple of the action count
//   positions:  (2H + 1) x d relative position table, row H is distance 0
//   alpha:      1 x 1 scale on the state before positions are added
struct SruParams {
  Parameter d1;
  Parameter d2;
  Parameter latent;
  Parameter positions;
  Parameter alpha;
  int half_context = 0;
  double dropout_positions = 0.0;
  double dropout_latent = 0.0;

  SruParams() = default;
  SruParams(int dim, int num_actions, const SruConfig& config, std::mt19937_64& rng);

  int dim() const { return static_cast<int>(d1.value().cols()); }
  int num_latent() const { return static_cast<int>(latent.value().rows()); }
  std::vector<Parameter*> parameters() { return {&d1, &d2, &latent, &positions, &alpha}; }
};

// Q x d slot memory.
struct SruState {
  Var memory;

  int slots() const { return static_cast<int>(memory.rows()); }
  int dim() const { return static_cast<int>(memory.cols()); }
};

// Adds omega (1 x d) to slot p. Throws std::out_of_range for a bad slot.
SruState sru_update(const SruState& state, Var omega, int slot);

// Table row for each of the Q slots relative to slot p, with distances
// clamped to [-H, H]. Row H of the table is distance 0.
std::vector<int> relative_position_rows(int slot, int num_slots, int half_context);
Var relative_positions(Tape& tape, int slot, int num_slots, SruParams& params, const ForwardContext& ctx);

struct SruOutput {
  Var h;        // 1 x d summary
  Var weights;  // 1 x Q attention weights
};

// h = w^T (C D1) with w = softmax over slots of the max over latent rows
// of Dropout(L) D2 (alpha C + Dropout(P(p)))^T.
SruOutput sru_output(const SruState& state, int slot, SruParams& params, const ForwardContext& ctx);

}  // namespace sruner

#endif  // SRUNER_SRU_HPP_
