#include "sruner/autograd.hpp"

#include <cassert>
#include <stdexcept>
#include <utility>

namespace sruner {

Parameter::Parameter(std::string name, Matrix value)
    : name_(std::move(name)), value_(std::move(value)) {
  grad_ = Matrix::Zero(value_.rows(), value_.cols());
}

void Parameter::zero_grad() {
  grad_.setZero(value_.rows(), value_.cols());
}

Matrix dropout_mask(Index rows, Index cols, double rate, const ForwardContext& ctx) {
  if (!ctx.training || rate <= 0.0) return Matrix::Ones(rows, cols);
  if (ctx.rng == nullptr) throw std::invalid_argument("dropout_mask: training without an rng");
  if (rate >= 1.0) return Matrix::Zero(rows, cols);
  std::bernoulli_distribution keep(1.0 - rate);
  const double kept = 1.0 / (1.0 - rate);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = keep(*ctx.rng) ? kept : 0.0;
  }
  return m;
}

const Matrix& Var::value() const { return tape_->node(id_).value; }

const Matrix& Var::grad() const { return tape_->node(id_).grad; }

Var Tape::record(Matrix value, bool requires_grad, std::function<void(Tape&)> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_ && requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = node(id);
  if (!n.requires_grad) return;
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::param(Parameter& p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var(this, it->second);
  Parameter* target = &p;
  int id = static_cast<int>(nodes_.size());
  Var v = record(p.value(), p.trainable(), [target, id](Tape& t) {
    const Matrix& g = t.node(id).grad;
    if (g.size() != 0) target->grad() += g;
  });
  param_nodes_.emplace(&p, v.id());
  return v;
}

Var Tape::gather(Parameter& p, const std::vector<int>& rows) {
  Matrix out(static_cast<Index>(rows.size()), p.value().cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = p.value().row(rows[i]);
  Parameter* target = &p;
  int id = static_cast<int>(nodes_.size());
  return record(std::move(out), p.trainable(), [target, id, rows](Tape& t) {
    const Matrix& g = t.node(id).grad;
    if (g.size() == 0) return;
    for (std::size_t i = 0; i < rows.size(); ++i) target->grad().row(rows[i]) += g.row(static_cast<Index>(i));
  });
}

void Tape::backward(Var output) {
  if (output.tape() != this) throw std::invalid_argument("backward: variable from another tape");
  if (output.value().size() != 1) throw std::invalid_argument("backward: output must be 1x1");
  Node& out = node(output.id());
  if (!out.requires_grad) return;
  out.grad = Matrix::Ones(1, 1);
  for (int id = output.id(); id >= 0; --id) {
    Node& n = node(id);
    if (n.backward && n.grad.size() != 0) n.backward(*this);
  }
}

namespace {

bool needs(const Var& v) { return v.tape()->node(v.id()).requires_grad; }

Tape& same_tape(const Var& a, const Var& b) {
  assert(a.tape() == b.tape());
  (void)b;
  return *a.tape();
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  int ia = a.id(), ib = b.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value() * b.value(), needs(a) || needs(b), [ia, ib, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    if (tp.node(ia).requires_grad) tp.accumulate(ia, g * tp.node(ib).value.transpose());
    if (tp.node(ib).requires_grad) tp.accumulate(ib, tp.node(ia).value.transpose() * g);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = same_tape(a, b);
  int ia = a.id(), ib = b.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value() * b.value().transpose(), needs(a) || needs(b), [ia, ib, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    if (tp.node(ia).requires_grad) tp.accumulate(ia, g * tp.node(ib).value);
    if (tp.node(ib).requires_grad) tp.accumulate(ib, g.transpose() * tp.node(ia).value);
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  int ia = a.id(), ib = b.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value() + b.value(), needs(a) || needs(b), [ia, ib, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    tp.accumulate(ia, g);
    tp.accumulate(ib, g);
  });
}

Var scale(Var a, double c) {
  Tape& t = *a.tape();
  int ia = a.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value() * c, needs(a), [ia, id, c](Tape& tp) { tp.accumulate(ia, tp.node(id).grad * c); });
}

Var scale_by(Var a, Var s) {
  Tape& t = same_tape(a, s);
  int ia = a.id(), is = s.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value() * s.scalar(), needs(a) || needs(s), [ia, is, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    if (tp.node(ia).requires_grad) tp.accumulate(ia, g * tp.node(is).value(0, 0));
    if (tp.node(is).requires_grad) {
      Matrix gs(1, 1);
      gs(0, 0) = g.cwiseProduct(tp.node(ia).value).sum();
      tp.accumulate(is, gs);
    }
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  int ia = a.id(), ib = b.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value().cwiseProduct(b.value()), needs(a) || needs(b), [ia, ib, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    if (tp.node(ia).requires_grad) tp.accumulate(ia, g.cwiseProduct(tp.node(ib).value));
    if (tp.node(ib).requires_grad) tp.accumulate(ib, g.cwiseProduct(tp.node(ia).value));
  });
}

Var mul_rows(Var a, Var r) {
  Tape& t = same_tape(a, r);
  assert(r.rows() == 1 && r.cols() == a.cols());
  Matrix out = a.value();
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = out.row(i).cwiseProduct(r.value());
  int ia = a.id(), ir = r.id();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a) || needs(r), [ia, ir, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    if (tp.node(ia).requires_grad) {
      Matrix ga = g;
      const Matrix& rv = tp.node(ir).value;
      for (Index i = 0; i < ga.rows(); ++i) ga.row(i) = ga.row(i).cwiseProduct(rv);
      tp.accumulate(ia, ga);
    }
    if (tp.node(ir).requires_grad) {
      tp.accumulate(ir, g.cwiseProduct(tp.node(ia).value).colwise().sum());
    }
  });
}

Var add_rows(Var a, Var r) {
  Tape& t = same_tape(a, r);
  assert(r.rows() == 1 && r.cols() == a.cols());
  Matrix out = a.value();
  out.rowwise() += r.value().row(0);
  int ia = a.id(), ir = r.id();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a) || needs(r), [ia, ir, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    tp.accumulate(ia, g);
    if (tp.node(ir).requires_grad) tp.accumulate(ir, g.colwise().sum());
  });
}

Var mask(Var a, const Matrix& m) {
  Tape& t = *a.tape();
  assert(m.rows() == a.rows() && m.cols() == a.cols());
  int ia = a.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value().cwiseProduct(m), needs(a), [ia, id, m](Tape& tp) {
    tp.accumulate(ia, tp.node(id).grad.cwiseProduct(m));
  });
}

Var tanh(Var a) {
  Tape& t = *a.tape();
  int ia = a.id();
  int id = static_cast<int>(t.size());
  return t.record(a.value().array().tanh().matrix(), needs(a), [ia, id](Tape& tp) {
    const Matrix& y = tp.node(id).value;
    Matrix d = (1.0 - y.array().square()).matrix();
    tp.accumulate(ia, tp.node(id).grad.cwiseProduct(d));
  });
}

Var softmax_rows(Var a) {
  Tape& t = *a.tape();
  Matrix out(a.rows(), a.cols());
  for (Index i = 0; i < a.rows(); ++i) {
    auto r = a.value().row(i);
    double mx = r.maxCoeff();
    auto e = (r.array() - mx).exp();
    out.row(i) = (e / e.sum()).matrix();
  }
  int ia = a.id();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a), [ia, id](Tape& tp) {
    const Matrix& y = tp.node(id).value;
    const Matrix& g = tp.node(id).grad;
    Matrix ga(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
      double dot = g.row(i).dot(y.row(i));
      ga.row(i) = (y.row(i).array() * (g.row(i).array() - dot)).matrix();
    }
    tp.accumulate(ia, ga);
  });
}

Var colwise_max(Var a) {
  Tape& t = *a.tape();
  Matrix out(1, a.cols());
  std::vector<Index> arg(static_cast<std::size_t>(a.cols()));
  for (Index c = 0; c < a.cols(); ++c) {
    Index r = 0;
    out(0, c) = a.value().col(c).maxCoeff(&r);
    arg[static_cast<std::size_t>(c)] = r;
  }
  int ia = a.id();
  Index rows = a.rows();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a), [ia, id, rows, arg](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    Matrix ga = Matrix::Zero(rows, g.cols());
    for (Index c = 0; c < g.cols(); ++c) ga(arg[static_cast<std::size_t>(c)], c) = g(0, c);
    tp.accumulate(ia, ga);
  });
}

Var concat_cols(Var a, Var b) {
  Tape& t = same_tape(a, b);
  assert(a.rows() == b.rows());
  Matrix out(a.rows(), a.cols() + b.cols());
  out << a.value(), b.value();
  int ia = a.id(), ib = b.id();
  Index ca = a.cols(), cb = b.cols();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a) || needs(b), [ia, ib, id, ca, cb](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    if (tp.node(ia).requires_grad) tp.accumulate(ia, g.leftCols(ca));
    if (tp.node(ib).requires_grad) tp.accumulate(ib, g.rightCols(cb));
  });
}

Var row(Var a, Index i) { return select_rows(a, {static_cast<int>(i)}); }

Var select_rows(Var a, const std::vector<int>& rows) {
  Tape& t = *a.tape();
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) out.row(static_cast<Index>(k)) = a.value().row(rows[k]);
  int ia = a.id();
  Index n = a.rows();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a), [ia, id, n, rows](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    Matrix ga = Matrix::Zero(n, g.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) ga.row(rows[k]) += g.row(static_cast<Index>(k));
    tp.accumulate(ia, ga);
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  if (rows.empty()) throw std::invalid_argument("stack_rows: no rows");
  Tape& t = *rows.front().tape();
  Index cols = rows.front().cols();
  Index total = 0;
  bool req = false;
  std::vector<int> ids;
  std::vector<Index> counts;
  for (const Var& r : rows) {
    assert(r.tape() == &t && r.cols() == cols);
    total += r.rows();
    req = req || needs(r);
    ids.push_back(r.id());
    counts.push_back(r.rows());
  }
  Matrix out(total, cols);
  Index at = 0;
  for (const Var& r : rows) {
    out.middleRows(at, r.rows()) = r.value();
    at += r.rows();
  }
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), req, [ids, counts, id](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    Index off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.node(ids[k]).requires_grad) tp.accumulate(ids[k], g.middleRows(off, counts[k]));
      off += counts[k];
    }
  });
}

Var add_to_row(Var a, Var v, Index i) {
  Tape& t = same_tape(a, v);
  assert(v.rows() == 1 && v.cols() == a.cols());
  Matrix out = a.value();
  out.row(i) += v.value().row(0);
  int ia = a.id(), iv = v.id();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a) || needs(v), [ia, iv, id, i](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    tp.accumulate(ia, g);
    if (tp.node(iv).requires_grad) tp.accumulate(iv, g.row(i));
  });
}

Var group_max_rows(Var a, const std::vector<std::vector<int>>& groups) {
  Tape& t = *a.tape();
  Index cols = a.cols();
  Matrix out(static_cast<Index>(groups.size()), cols);
  // arg[k * cols + c] = source row of the max
  std::vector<int> arg(groups.size() * static_cast<std::size_t>(cols));
  for (std::size_t k = 0; k < groups.size(); ++k) {
    if (groups[k].empty()) throw std::invalid_argument("group_max_rows: empty group");
    for (Index c = 0; c < cols; ++c) {
      int best = groups[k].front();
      for (int r : groups[k]) {
        if (a.value()(r, c) > a.value()(best, c)) best = r;
      }
      out(static_cast<Index>(k), c) = a.value()(best, c);
      arg[k * static_cast<std::size_t>(cols) + static_cast<std::size_t>(c)] = best;
    }
  }
  int ia = a.id();
  Index n = a.rows();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a), [ia, id, n, cols, arg](Tape& tp) {
    const Matrix& g = tp.node(id).grad;
    Matrix ga = Matrix::Zero(n, cols);
    for (Index k = 0; k < g.rows(); ++k) {
      for (Index c = 0; c < cols; ++c) {
        ga(arg[static_cast<std::size_t>(k * cols + c)], c) += g(k, c);
      }
    }
    tp.accumulate(ia, ga);
  });
}

Var sum(Var a) {
  Tape& t = *a.tape();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  int ia = a.id();
  Index r = a.rows(), c = a.cols();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(a), [ia, id, r, c](Tape& tp) {
    tp.accumulate(ia, Matrix::Constant(r, c, tp.node(id).grad(0, 0)));
  });
}

Var bce_with_logits_mean(Var logits, const Matrix& targets) {
  Tape& t = *logits.tape();
  const Matrix& u = logits.value();
  if (u.rows() != targets.rows() || u.cols() != targets.cols()) {
    throw std::invalid_argument("bce_with_logits_mean: shape mismatch");
  }
  double total = 0.0;
  for (Index i = 0; i < u.rows(); ++i) {
    for (Index j = 0; j < u.cols(); ++j) {
      double x = u(i, j);
      double g = targets(i, j);
      total += std::max(x, 0.0) - x * g + std::log1p(std::exp(-std::abs(x)));
    }
  }
  double count = static_cast<double>(u.size());
  Matrix out(1, 1);
  out(0, 0) = total / count;
  int ia = logits.id();
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), needs(logits), [ia, id, targets, count](Tape& tp) {
    const Matrix& x = tp.node(ia).value;
    double go = tp.node(id).grad(0, 0) / count;
    Matrix ga(x.rows(), x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < x.cols(); ++j) ga(i, j) = (sigmoid(x(i, j)) - targets(i, j)) * go;
    }
    tp.accumulate(ia, ga);
  });
}

Var mean_of(const std::vector<Var>& scalars) {
  if (scalars.empty()) throw std::invalid_argument("mean_of: empty");
  Tape& t = *scalars.front().tape();
  double total = 0.0;
  bool req = false;
  std::vector<int> ids;
  for (const Var& s : scalars) {
    total += s.scalar();
    req = req || needs(s);
    ids.push_back(s.id());
  }
  double n = static_cast<double>(scalars.size());
  Matrix out(1, 1);
  out(0, 0) = total / n;
  int id = static_cast<int>(t.size());
  return t.record(std::move(out), req, [ids, id, n](Tape& tp) {
    Matrix g = tp.node(id).grad / n;
    for (int s : ids) tp.accumulate(s, g);
  });
}

}  // namespace sruner
