#include "temarl/autodiff.h"

#include <cmath>
#include <utility>

#include "temarl/errors.h"

namespace temarl {

const Matrix& GradientMap::at(const Parameter& p) const {
  auto it = grads_.find(&p);
  if (it == grads_.end()) throw ContractViolation("no gradient for parameter '" + p.name + "'");
  return it->second;
}

const Matrix* GradientMap::find(const Parameter& p) const {
  auto it = grads_.find(&p);
  return it == grads_.end() ? nullptr : &it->second;
}

Matrix* GradientMap::find(const Parameter& p) {
  auto it = grads_.find(&p);
  return it == grads_.end() ? nullptr : &it->second;
}

void GradientMap::accumulate(const Parameter& p, const Matrix& g) {
  auto [it, inserted] = grads_.try_emplace(&p, g);
  if (!inserted) it->second += g;
}

void GradientMap::scale(double factor) {
  for (auto& [p, g] : grads_) g *= factor;
}

Matrix RowSoftmax(const Matrix& logits) {
  Matrix out = logits.colwise() - logits.rowwise().maxCoeff();
  out = out.array().exp().matrix();
  out.array().colwise() /= out.rowwise().sum().array();
  return out;
}

Matrix RowLogSoftmax(const Matrix& logits) {
  Vector max = logits.rowwise().maxCoeff();
  Matrix shifted = logits.colwise() - max;
  Vector lse = shifted.array().exp().rowwise().sum().log().matrix();
  return shifted.colwise() - lse;
}

void Tape::check(Var v) const {
  if (v.id_ < 0 || static_cast<std::size_t>(v.id_) >= nodes_.size()) {
    throw ContractViolation("Var does not belong to this tape");
  }
}

Var Tape::push(Matrix value, bool requires_grad, Backprop backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size()) - 1);
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::parameter(Parameter& p) {
  Var v = push(p.value, true, nullptr);
  nodes_.back().param = &p;
  return v;
}

const Matrix& Tape::value(Var v) const {
  check(v);
  return val(v.id_);
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  Require(m.rows() == 1 && m.cols() == 1, "scalar() on a non-scalar node");
  return m(0, 0);
}

Var Tape::matmul(Var a, Var b) {
  check(a);
  check(b);
  Require(val(a.id_).cols() == val(b.id_).rows(), "matmul: inner dimensions differ");
  int ia = a.id_, ib = b.id_;
  return push(val(ia) * val(ib), needs(a) || needs(b), [ia, ib](Tape& t, const Matrix& g) {
    if (t.nodes_[ia].requires_grad) t.accumulate(ia, g * t.val(ib).transpose());
    if (t.nodes_[ib].requires_grad) t.accumulate(ib, t.val(ia).transpose() * g);
  });
}

Var Tape::affine(Var x, Var weight, Var bias) {
  check(x);
  check(weight);
  check(bias);
  const Matrix& xv = val(x.id_);
  const Matrix& wv = val(weight.id_);
  const Matrix& bv = val(bias.id_);
  Require(xv.cols() == wv.rows(), "affine: input width " + std::to_string(xv.cols()) +
                                      " does not match weight rows " +
                                      std::to_string(wv.rows()));
  Require(bv.rows() == 1 && bv.cols() == wv.cols(), "affine: bias shape mismatch");
  Matrix out(xv.rows(), wv.cols());
  out.noalias() = xv * wv;
  out.rowwise() += bv.row(0);
  int ix = x.id_, iw = weight.id_, ib = bias.id_;
  return push(std::move(out), needs(x) || needs(weight) || needs(bias),
              [ix, iw, ib](Tape& t, const Matrix& g) {
                if (t.nodes_[ix].requires_grad) t.accumulate(ix, g * t.val(iw).transpose());
                if (t.nodes_[iw].requires_grad) t.accumulate(iw, t.val(ix).transpose() * g);
                if (t.nodes_[ib].requires_grad) t.accumulate(ib, g.colwise().sum());
              });
}

Var Tape::add(Var a, Var b) {
  check(a);
  check(b);
  Require(val(a.id_).rows() == val(b.id_).rows() && val(a.id_).cols() == val(b.id_).cols(),
          "add: shape mismatch");
  int ia = a.id_, ib = b.id_;
  return push(val(ia) + val(ib), needs(a) || needs(b), [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, g);
  });
}

Var Tape::sub(Var a, Var b) {
  check(a);
  check(b);
  Require(val(a.id_).rows() == val(b.id_).rows() && val(a.id_).cols() == val(b.id_).cols(),
          "sub: shape mismatch");
  int ia = a.id_, ib = b.id_;
  return push(val(ia) - val(ib), needs(a) || needs(b), [ia, ib](Tape& t, const Matrix& g) {
    t.accumulate(ia, g);
    t.accumulate(ib, -g);
  });
}

Var Tape::mul(Var a, Var b) {
  check(a);
  check(b);
  Require(val(a.id_).rows() == val(b.id_).rows() && val(a.id_).cols() == val(b.id_).cols(),
          "mul: shape mismatch");
  int ia = a.id_, ib = b.id_;
  return push(val(ia).cwiseProduct(val(ib)), needs(a) || needs(b),
              [ia, ib](Tape& t, const Matrix& g) {
                if (t.nodes_[ia].requires_grad) t.accumulate(ia, g.cwiseProduct(t.val(ib)));
                if (t.nodes_[ib].requires_grad) t.accumulate(ib, g.cwiseProduct(t.val(ia)));
              });
}

Var Tape::mul_col(Var x, Var c) {
  check(x);
  check(c);
  const Matrix& xv = val(x.id_);
  const Matrix& cv = val(c.id_);
  Require(cv.cols() == 1 && cv.rows() == xv.rows(), "mul_col: expects an n x 1 column");
  Matrix out = xv.array().colwise() * cv.col(0).array();
  int ix = x.id_, ic = c.id_;
  return push(std::move(out), needs(x) || needs(c), [ix, ic](Tape& t, const Matrix& g) {
    if (t.nodes_[ix].requires_grad) {
      Matrix gx = g.array().colwise() * t.val(ic).col(0).array();
      t.accumulate(ix, gx);
    }
    if (t.nodes_[ic].requires_grad) {
      t.accumulate(ic, g.cwiseProduct(t.val(ix)).rowwise().sum());
    }
  });
}

Var Tape::scale(Var a, double s) {
  check(a);
  int ia = a.id_;
  return push(val(ia) * s, needs(a), [ia, s](Tape& t, const Matrix& g) { t.accumulate(ia, g * s); });
}

Var Tape::add_scalar(Var a, double s) {
  check(a);
  int ia = a.id_;
  return push(val(ia).array() + s, needs(a), [ia](Tape& t, const Matrix& g) { t.accumulate(ia, g); });
}

Var Tape::relu(Var a) {
  check(a);
  int ia = a.id_;
  return push(val(ia).cwiseMax(0.0), needs(a), [ia](Tape& t, const Matrix& g) {
    Matrix gx = (t.val(ia).array() > 0.0).select(g.array(), 0.0).matrix();
    t.accumulate(ia, gx);
  });
}

Var Tape::exp(Var a) {
  check(a);
  int ia = a.id_;
  Var out = push(val(ia).array().exp().matrix(), needs(a), nullptr);
  int io = out.id_;
  if (needs(a)) {
    nodes_.back().backprop = [ia, io](Tape& t, const Matrix& g) {
      t.accumulate(ia, g.cwiseProduct(t.val(io)));
    };
  }
  return out;
}

Var Tape::log(Var a) {
  check(a);
  int ia = a.id_;
  return push(val(ia).array().log().matrix(), needs(a), [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, g.cwiseQuotient(t.val(ia)));
  });
}

Var Tape::square(Var a) {
  check(a);
  int ia = a.id_;
  return push(val(ia).array().square().matrix(), needs(a), [ia](Tape& t, const Matrix& g) {
    t.accumulate(ia, 2.0 * g.cwiseProduct(t.val(ia)));
  });
}

Var Tape::clamp(Var a, double lo, double hi) {
  check(a);
  Require(lo <= hi, "clamp: lo > hi");
  int ia = a.id_;
  return push(val(ia).cwiseMax(lo).cwiseMin(hi), needs(a), [ia, lo, hi](Tape& t, const Matrix& g) {
    const Matrix& x = t.val(ia);
    Matrix gx = (x.array() >= lo && x.array() <= hi).select(g.array(), 0.0).matrix();
    t.accumulate(ia, gx);
  });
}

Var Tape::softmax(Var a) {
  check(a);
  int ia = a.id_;
  Var out = push(RowSoftmax(val(ia)), needs(a), nullptr);
  int io = out.id_;
  if (needs(a)) {
    nodes_.back().backprop = [ia, io](Tape& t, const Matrix& g) {
      const Matrix& y = t.val(io);
      Vector dot = g.cwiseProduct(y).rowwise().sum();
      Matrix gx = y.array() * (g.colwise() - dot).array();
      t.accumulate(ia, gx);
    };
  }
  return out;
}

Var Tape::log_softmax(Var a) {
  check(a);
  int ia = a.id_;
  Var out = push(RowLogSoftmax(val(ia)), needs(a), nullptr);
  int io = out.id_;
  if (needs(a)) {
    nodes_.back().backprop = [ia, io](Tape& t, const Matrix& g) {
      Matrix p = t.val(io).array().exp();
      Vector total = g.rowwise().sum();
      Matrix gx = g - (p.array().colwise() * total.array()).matrix();
      t.accumulate(ia, gx);
    };
  }
  return out;
}

Var Tape::sum(Var a) {
  check(a);
  int ia = a.id_;
  Matrix out(1, 1);
  out(0, 0) = val(ia).sum();
  return push(std::move(out), needs(a), [ia](Tape& t, const Matrix& g) {
    const Matrix& x = t.val(ia);
    t.accumulate(ia, Matrix::Constant(x.rows(), x.cols(), g(0, 0)));
  });
}

Var Tape::mean(Var a) {
  check(a);
  const double n = static_cast<double>(val(a.id_).size());
  Require(n > 0, "mean of an empty node");
  return scale(sum(a), 1.0 / n);
}

Var Tape::row_sum(Var a) {
  check(a);
  int ia = a.id_;
  Matrix out = val(ia).rowwise().sum();
  return push(std::move(out), needs(a), [ia](Tape& t, const Matrix& g) {
    const Matrix& x = t.val(ia);
    Matrix gx = g.col(0).replicate(1, x.cols());
    t.accumulate(ia, gx);
  });
}

Var Tape::pick(Var a, std::span<const int> columns) {
  check(a);
  const Matrix& x = val(a.id_);
  Require(static_cast<Eigen::Index>(columns.size()) == x.rows(), "pick: one column per row required");
  Matrix out(x.rows(), 1);
  std::vector<int> cols(columns.begin(), columns.end());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Require(cols[static_cast<std::size_t>(i)] >= 0 && cols[static_cast<std::size_t>(i)] < x.cols(),
            "pick: column out of range");
    out(i, 0) = x(i, cols[static_cast<std::size_t>(i)]);
  }
  int ia = a.id_;
  return push(std::move(out), needs(a), [ia, cols = std::move(cols)](Tape& t, const Matrix& g) {
    const Matrix& x = t.val(ia);
    Matrix gx = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) gx(i, cols[static_cast<std::size_t>(i)]) = g(i, 0);
    t.accumulate(ia, gx);
  });
}

Var Tape::gather_rows(Var a, std::span<const int> rows) {
  check(a);
  const Matrix& x = val(a.id_);
  std::vector<int> idx(rows.begin(), rows.end());
  for (int r : idx) Require(r >= 0 && r < x.rows(), "gather_rows: row out of range");
  Matrix out = x(idx, Eigen::indexing::all);
  int ia = a.id_;
  return push(std::move(out), needs(a), [ia, idx = std::move(idx)](Tape& t, const Matrix& g) {
    const Matrix& x = t.val(ia);
    Matrix gx = Matrix::Zero(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      double* dst = gx.col(c).data();
      const double* src = g.col(c).data();
      for (std::size_t i = 0; i < idx.size(); ++i) dst[idx[i]] += src[i];
    }
    t.accumulate(ia, gx);
  });
}

Var Tape::sum_row_groups(Var a, int group) {
  check(a);
  const Matrix& x = val(a.id_);
  Require(group >= 1 && x.rows() % group == 0, "sum_row_groups: row count not divisible by group size");
  const Eigen::Index n = x.rows() / group;
  Matrix out = Matrix::Zero(n, x.cols());
  for (Eigen::Index i = 0; i < n; ++i) out.row(i) = x.middleRows(i * group, group).colwise().sum();
  int ia = a.id_;
  return push(std::move(out), needs(a), [ia, group, n](Tape& t, const Matrix& g) {
    Matrix gx(n * group, g.cols());
    for (Eigen::Index i = 0; i < n; ++i) gx.middleRows(i * group, group) = g.row(i).replicate(group, 1);
    t.accumulate(ia, gx);
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  Require(!parts.empty(), "concat_cols: no inputs");
  Eigen::Index rows = -1, cols = 0;
  bool grad = false;
  for (Var p : parts) {
    check(p);
    const Matrix& m = val(p.id_);
    if (rows < 0) rows = m.rows();
    Require(m.rows() == rows, "concat_cols: row count mismatch");
    cols += m.cols();
    grad = grad || needs(p);
  }
  Matrix out(rows, cols);
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& m = val(p.id_);
    out.middleCols(at, m.cols()) = m;
    at += m.cols();
    ids.push_back(p.id_);
    widths.push_back(m.cols());
  }
  return push(std::move(out), grad, [ids = std::move(ids), widths = std::move(widths)](Tape& t, const Matrix& g) {
    Eigen::Index off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      t.accumulate(ids[k], g.middleCols(off, widths[k]));
      off += widths[k];
    }
  });
}

Var Tape::slice_cols(Var a, int start, int count) {
  check(a);
  const Matrix& x = val(a.id_);
  Require(start >= 0 && count >= 0 && start + count <= x.cols(), "slice_cols: out of range");
  int ia = a.id_;
  return push(x.middleCols(start, count), needs(a), [ia, start, count](Tape& t, const Matrix& g) {
    const Matrix& x = t.val(ia);
    Matrix gx = Matrix::Zero(x.rows(), x.cols());
    gx.middleCols(start, count) = g;
    t.accumulate(ia, gx);
  });
}

Var Tape::slice_rows(Var a, int start, int count) {
  check(a);
  const Matrix& x = val(a.id_);
  Require(start >= 0 && count >= 0 && start + count <= x.rows(), "slice_rows: out of range");
  int ia = a.id_;
  return push(x.middleRows(start, count), needs(a), [ia, start, count](Tape& t, const Matrix& g) {
    const Matrix& x = t.val(ia);
    Matrix gx = Matrix::Zero(x.rows(), x.cols());
    gx.middleRows(start, count) = g;
    t.accumulate(ia, gx);
  });
}

Var Tape::straight_through(Var soft, Matrix hard) {
  check(soft);
  Require(hard.rows() == val(soft.id_).rows() && hard.cols() == val(soft.id_).cols(),
          "straight_through: shape mismatch");
  int is = soft.id_;
  return push(std::move(hard), needs(soft), [is](Tape& t, const Matrix& g) { t.accumulate(is, g); });
}

Var Tape::stop_gradient(Var a) {
  check(a);
  return constant(val(a.id_));
}

GradientMap Tape::backward(Var output) {
  check(output);
  Require(val(output.id_).rows() == 1 && val(output.id_).cols() == 1,
          "backward: output must be a 1 x 1 scalar");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  GradientMap grads;
  if (!needs(output)) return grads;
  nodes_[static_cast<std::size_t>(output.id_)].grad = Matrix::Ones(1, 1);
  for (int i = output.id_; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      grads.accumulate(*n.param, n.grad);
    } else if (n.backprop) {
      // The closure only touches strictly earlier nodes, so `n` stays valid.
      n.backprop(*this, n.grad);
    }
  }
  return grads;
}

}  // namespace temarl
