#ifndef SRUNER_AUTOGRAD_HPP_
#define SRUNER_AUTOGRAD_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace sruner {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

// Shared by the loss and by gold-matrix softening so that
// sigmoid(u) - G cancels exactly on softened cells.
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// A named trainable tensor. Gradients accumulate into `grad` across
// backward passes until zero_grad().
class Parameter {
 public:
  Parameter() = default;
  Parameter(std::string name, Matrix value);

  const std::string& name() const { return name_; }
  Matrix& value() { return value_; }
  const Matrix& value() const { return value_; }
  Matrix& grad() { return grad_; }
  const Matrix& grad() const { return grad_; }

  bool trainable() const { return trainable_; }
  void set_trainable(bool on) { trainable_ = on; }

  void zero_grad();

 private:
  std::string name_;
  Matrix value_;
  Matrix grad_;
  bool trainable_ = true;
};

class Tape;

// Handle to a node recorded on a Tape. Cheap to copy; only valid while
// the owning tape is alive.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  // Gradient of the last backward() output with respect to this node.
  // Zero-sized when nothing flowed here.
  const Matrix& grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

  Tape* tape() const { return tape_; }
  int id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode automatic differentiation over dense matrices. Nodes are
// recorded in creation order, so creation order is a topological order.
class Tape {
 public:
  explicit Tape(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool grad_enabled() const { return grad_enabled_; }

  Var constant(Matrix value);
  // Leaf bound to a parameter; reusing the same parameter returns the
  // same node.
  Var param(Parameter& p);
  // Rows of a parameter table; gradient is scattered back into p.grad().
  Var gather(Parameter& p, const std::vector<int>& rows);

  // Seeds d(output)/d(output) = 1 for a 1x1 output and propagates.
  void backward(Var output);

  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward;
  };

  Node& node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

  // Adds g into the gradient of node `id`, allocating on first use.
  void accumulate(int id, const Matrix& g);

  // Records a node. `backward` is dropped when no input requires grad.
  Var record(Matrix value, bool requires_grad, std::function<void(Tape&)> backward);

 private:
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
  bool grad_enabled_;
};

// Training flag plus the RNG that drives every dropout mask.
struct ForwardContext {
  bool training = false;
  std::mt19937_64* rng = nullptr;
};

// Inverted-dropout mask (kept entries scaled by 1/(1-rate)); all ones when
// not training or rate is 0.
Matrix dropout_mask(Index rows, Index cols, double rate, const ForwardContext& ctx);

// Differentiable operations. Shapes follow Eigen conventions; row vectors
// are 1xN matrices.
Var matmul(Var a, Var b);
// a * b^T
Var matmul_nt(Var a, Var b);
Var add(Var a, Var b);
Var scale(Var a, double c);
// s is 1x1.
Var scale_by(Var a, Var s);
Var hadamard(Var a, Var b);
// Multiplies every row of a by the 1xC row vector r.
Var mul_rows(Var a, Var r);
// Adds the 1xC row vector r to every row of a.
Var add_rows(Var a, Var r);
// Elementwise product with a constant (dropout masks, gates).
Var mask(Var a, const Matrix& m);
Var tanh(Var a);
Var softmax_rows(Var a);
// 1xC row of column maxima; gradient routes to the arg max.
Var colwise_max(Var a);
Var concat_cols(Var a, Var b);
Var row(Var a, Index i);
Var select_rows(Var a, const std::vector<int>& rows);
Var stack_rows(const std::vector<Var>& rows);
// a with v (1xC) added to row i.
Var add_to_row(Var a, Var v, Index i);
// Output row k is the coordinatewise max over rows groups[k] of a.
Var group_max_rows(Var a, const std::vector<std::vector<int>>& groups);
Var sum(Var a);
// Mean over all entries of binary cross entropy between sigmoid(logits)
// and constant targets.
Var bce_with_logits_mean(Var logits, const Matrix& targets);
// Mean of 1x1 values.
Var mean_of(const std::vector<Var>& scalars);

}  // namespace sruner

#endif  // SRUNER_AUTOGRAD_HPP_
