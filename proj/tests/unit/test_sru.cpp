#include "doctest.h"

#include "sruner/sru.hpp"
#include "support.hpp"

using namespace sruner;
using test_support::random_matrix;

namespace {

SruParams small_params(int d, int num_actions, int half_context, std::uint64_t seed) {
  SruConfig cfg;
  cfg.latent_multiplier = 1;
  cfg.half_context = half_context;
  cfg.dropout_positions = 0.0;
  cfg.dropout_latent = 0.0;
  cfg.train_alpha = true;
  std::mt19937_64 rng(seed);
  SruParams p(d, num_actions, cfg, rng);
  // Non-trivial diagonals and alpha.
  p.d1.value() = random_matrix(1, d, rng);
  p.d2.value() = random_matrix(1, d, rng);
  p.alpha.value()(0, 0) = 0.7;
  return p;
}

// Straight-line evaluation with plain loops.
Matrix reference_output(const Matrix& c, int slot, const SruParams& p) {
  const Index q = c.rows(), d = c.cols(), j = p.latent.value().rows();
  const int h = p.half_context;
  std::vector<double> score(static_cast<std::size_t>(q), -1e300);
  for (Index s = 0; s < q; ++s) {
    int dist = static_cast<int>(s) - slot;
    dist = dist < -h ? -h : (dist > h ? h : dist);
    for (Index l = 0; l < j; ++l) {
      double a = 0.0;
      for (Index k = 0; k < d; ++k) {
        double cpos = p.alpha.value()(0, 0) * c(s, k) + p.positions.value()(dist + h, k);
        a += p.latent.value()(l, k) * p.d2.value()(0, k) * cpos;
      }
      score[static_cast<std::size_t>(s)] = std::max(score[static_cast<std::size_t>(s)], a);
    }
  }
  double mx = *std::max_element(score.begin(), score.end());
  double z = 0.0;
  for (double& v : score) z += (v = std::exp(v - mx));
  Matrix out = Matrix::Zero(1, d);
  for (Index s = 0; s < q; ++s) {
    for (Index k = 0; k < d; ++k) out(0, k) += score[static_cast<std::size_t>(s)] / z * c(s, k) * p.d1.value()(0, k);
  }
  return out;
}

}  // namespace

TEST_CASE("update adds omega to one slot only") {
  Tape t;
  Matrix zeros = Matrix::Zero(3, 2);
  SruState s{t.constant(zeros)};
  Matrix om(1, 2);
  om << 1, 2;
  SruState next = sru_update(s, t.constant(om), 1);
  CHECK(next.memory.value().row(1) == om);
  CHECK(next.memory.value().row(0).isZero());
  CHECK(next.memory.value().row(2).isZero());
  CHECK(sru_update(s, t.constant(Matrix::Zero(1, 2)), 0).memory.value() == zeros);
  CHECK_THROWS_AS(sru_update(s, t.constant(om), 3), std::out_of_range);
  CHECK_THROWS_AS(sru_update(s, t.constant(om), -1), std::out_of_range);
}

TEST_CASE("update locality and additivity on random states") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Tape t;
    Matrix c = random_matrix(5, 3, rng);
    Matrix w1 = random_matrix(1, 3, rng), w2 = random_matrix(1, 3, rng);
    int p = static_cast<int>(rng() % 5);
    SruState s{t.constant(c)};
    SruState twice = sru_update(sru_update(s, t.constant(w1), p), t.constant(w2), p);
    SruState once = sru_update(s, t.constant(w1 + w2), p);
    CHECK((twice.memory.value() - once.memory.value()).cwiseAbs().maxCoeff() < 1e-12);
    for (int r = 0; r < 5; ++r) {
      if (r != p) CHECK(once.memory.value().row(r) == c.row(r));
    }
  }
}

TEST_CASE("relative position rows clamp at the half context") {
  CHECK(relative_position_rows(0, 3, 2) == std::vector<int>{2, 3, 4});
  CHECK(relative_position_rows(0, 3, 5) == std::vector<int>{5, 6, 7});
  CHECK(relative_position_rows(2, 6, 1) == std::vector<int>{0, 0, 1, 2, 2, 2});
  SruParams p = small_params(3, 2, 1, 1);
  Tape t;
  ForwardContext ctx;
  Var rows = relative_positions(t, 0, 4, p, ctx);
  CHECK(rows.value().row(3) == p.positions.value().row(2));
  CHECK(rows.value().row(2) == p.positions.value().row(2));
}

TEST_CASE("single slot attends to itself") {
  SruParams p = small_params(3, 2, 2, 3);
  std::mt19937_64 rng(1);
  Matrix c = random_matrix(1, 3, rng);
  Tape t;
  ForwardContext ctx;
  SruOutput out = sru_output(SruState{t.constant(c)}, 0, p, ctx);
  CHECK(out.weights.value()(0, 0) == doctest::Approx(1.0));
  CHECK((out.h.value() - c.cwiseProduct(p.d1.value())).norm() < 1e-12);
}

TEST_CASE("zero latents give uniform attention") {
  SruParams p = small_params(3, 2, 2, 3);
  p.latent.value().setZero();
  std::mt19937_64 rng(1);
  Matrix c = random_matrix(4, 3, rng);
  Tape t;
  ForwardContext ctx;
  SruOutput out = sru_output(SruState{t.constant(c)}, 1, p, ctx);
  for (int q = 0; q < 4; ++q) CHECK(out.weights.value()(0, q) == doctest::Approx(0.25));
  Matrix mean = c.colwise().mean().cwiseProduct(p.d1.value());
  CHECK((out.h.value() - mean).norm() < 1e-12);
}

TEST_CASE("output agrees with a loop implementation") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 10; ++trial) {
    SruParams p = small_params(3, 2, 2, static_cast<std::uint64_t>(trial));
    Matrix c = random_matrix(4, 3, rng);
    int slot = trial % 4;
    Tape t;
    ForwardContext ctx;
    SruOutput out = sru_output(SruState{t.constant(c)}, slot, p, ctx);
    CHECK((out.h.value() - reference_output(c, slot, p)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(out.weights.value().minCoeff() >= 0.0);
    CHECK(out.weights.value().sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("gradients with respect to state and parameters") {
  SruParams p = small_params(3, 2, 2, 5);
  std::mt19937_64 rng(6);
  Parameter c("c", random_matrix(4, 3, rng));
  Matrix w = random_matrix(1, 3, rng);
  ForwardContext ctx;
  auto loss = [&](Tape& t) { return sum(mask(sru_output(SruState{t.param(c)}, 2, p, ctx).h, w)); };
  std::vector<Parameter*> all = p.parameters();
  all.push_back(&c);
  for (Parameter* x : all) x->zero_grad();
  {
    Tape t;
    t.backward(loss(t));
  }
  for (Parameter* x : all) {
    Matrix numeric = test_support::numeric_gradient(x->value(), [&] {
      Tape t(false);
      return loss(t).scalar();
    });
    INFO(x->name());
    CHECK(test_support::relative_error(x->grad(), numeric) < 1e-4);
  }
}

TEST_CASE("alpha is frozen unless configured") {
  std::mt19937_64 rng(1);
  SruConfig cfg;
  SruParams frozen(4, 6, cfg, rng);
  CHECK_FALSE(frozen.alpha.trainable());
  CHECK(frozen.alpha.value()(0, 0) == 1.0);
  CHECK(frozen.num_latent() == 12);
  CHECK(frozen.positions.value().rows() == 2 * 150 + 1);
  cfg.train_alpha = true;
  CHECK(SruParams(4, 6, cfg, rng).alpha.trainable());
}

TEST_CASE("dropout only while training") {
  SruConfig cfg;
  cfg.half_context = 3;
  std::mt19937_64 rng(1);
  SruParams p(4, 4, cfg, rng);
  Matrix c = random_matrix(5, 4, rng);
  Tape t;
  ForwardContext eval;
  Matrix a = sru_output(SruState{t.constant(c)}, 1, p, eval).h.value();
  Matrix b = sru_output(SruState{t.constant(c)}, 1, p, eval).h.value();
  CHECK(a == b);
  std::mt19937_64 drng(2);
  ForwardContext train{true, &drng};
  bool differs = false;
  for (int i = 0; i < 5; ++i) differs |= sru_output(SruState{t.constant(c)}, 1, p, train).h.value() != a;
  CHECK(differs);
}
