#include "sruner/sru.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sruner {

SruParams::SruParams(int dim, int num_actions, const SruConfig& config, std::mt19937_64& rng)
    : half_context(config.half_context),
      dropout_positions(config.dropout_positions),
      dropout_latent(config.dropout_latent) {
  if (config.latent_multiplier < 1) throw std::invalid_argument("sru latent multiplier must be >= 1");
  if (config.half_context < 0) throw std::invalid_argument("sru half context must be >= 0");
  const int j = config.latent_multiplier * num_actions;
  std::normal_distribution<double> latent_init(0.0, 1.0 / std::sqrt(static_cast<double>(dim)));
  std::normal_distribution<double> pos_init(0.0, 0.3);
  Matrix l(j, dim);
  for (Index r = 0; r < l.rows(); ++r) {
    for (Index c = 0; c < l.cols(); ++c) l(r, c) = latent_init(rng);
  }
  Matrix p(2 * config.half_context + 1, dim);
  for (Index r = 0; r < p.rows(); ++r) {
    for (Index c = 0; c < p.cols(); ++c) p(r, c) = pos_init(rng);
  }
  d1 = Parameter("sru.d1", Matrix::Ones(1, dim));
  d2 = Parameter("sru.d2", Matrix::Ones(1, dim));
  latent = Parameter("sru.latent", std::move(l));
  positions = Parameter("sru.positions", std::move(p));
  alpha = Parameter("sru.alpha", Matrix::Ones(1, 1));
  alpha.set_trainable(config.train_alpha);
}

SruState sru_update(const SruState& state, Var omega, int slot) {
  if (slot < 0 || slot >= state.slots()) {
    throw std::out_of_range("sru_update: slot " + std::to_string(slot) + " outside [0, " +
                            std::to_string(state.slots()) + ")");
  }
  return SruState{add_to_row(state.memory, omega, slot)};
}

std::vector<int> relative_position_rows(int slot, int num_slots, int half_context) {
  std::vector<int> rows(static_cast<std::size_t>(num_slots));
  for (int q = 0; q < num_slots; ++q) {
    rows[static_cast<std::size_t>(q)] = std::clamp(q - slot, -half_context, half_context) + half_context;
  }
  return rows;
}

Var relative_positions(Tape& tape, int slot, int num_slots, SruParams& params, const ForwardContext& ctx) {
  Var p = tape.gather(params.positions, relative_position_rows(slot, num_slots, params.half_context));
  return mask(p, dropout_mask(p.rows(), p.cols(), params.dropout_positions, ctx));
}

SruOutput sru_output(const SruState& state, int slot, SruParams& params, const ForwardContext& ctx) {
  if (slot < 0 || slot >= state.slots()) {
    throw std::out_of_range("sru_output: slot " + std::to_string(slot) + " outside [0, " +
                            std::to_string(state.slots()) + ")");
  }
  Tape& tape = *state.memory.tape();
  Var c = state.memory;
  Var c_pos = add(scale_by(c, tape.param(params.alpha)), relative_positions(tape, slot, state.slots(), params, ctx));
  Var l = tape.param(params.latent);
  l = mask(l, dropout_mask(l.rows(), l.cols(), params.dropout_latent, ctx));
  Var scores = matmul_nt(mul_rows(l, tape.param(params.d2)), c_pos);  // J x Q
  Var w = softmax_rows(colwise_max(scores));                          // 1 x Q
  Var h = matmul(w, mul_rows(c, tape.param(params.d1)));
  return {h, w};
}

}  // namespace sruner
