#ifndef TEMARL_AUTODIFF_H_
#define TEMARL_AUTODIFF_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace temarl {

// Batched values are row-per-sample matrices throughout the library.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

// A named, trainable array. Identity (address) is what gradients are keyed by,
// so a Parameter must not be relocated while a tape that references it lives.
struct Parameter {
  std::string name;
  Matrix value;
};

// d(output)/d(parameter) for every parameter reachable from the output.
class GradientMap {
 public:
  bool contains(const Parameter& p) const { return grads_.count(&p) != 0; }
  const Matrix& at(const Parameter& p) const;
  // Returns nullptr when the parameter received no gradient.
  const Matrix* find(const Parameter& p) const;
  Matrix* find(const Parameter& p);
  void accumulate(const Parameter& p, const Matrix& g);
  void scale(double factor);
  std::size_t size() const { return grads_.size(); }

 private:
  std::unordered_map<const Parameter*, Matrix> grads_;
};

class Tape;

// Lightweight handle to a node recorded on a Tape.
class Var {
 public:
  Var() = default;
  bool valid() const { return id_ >= 0; }

 private:
  friend class Tape;
  explicit Var(int id) : id_(id) {}
  int id_ = -1;
};

// Records matrix operations and replays them backwards. Only the handful of
// primitives the learners need are provided; anything else is composed.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves.
  Var constant(Matrix value);
  Var parameter(Parameter& p);

  const Matrix& value(Var v) const;
  double scalar(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  // Linear algebra.
  Var matmul(Var a, Var b);
  Var affine(Var x, Var weight, Var bias);  // x * W + b, b broadcast over rows
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);      // elementwise, equal shapes
  Var mul_col(Var x, Var c);  // x (n x m) scaled row-wise by c (n x 1)
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);

  // Elementwise nonlinearities.
  Var relu(Var a);
  Var exp(Var a);
  Var log(Var a);
  Var square(Var a);
  Var clamp(Var a, double lo, double hi);

  // Row-wise distributions.
  Var softmax(Var a);
  Var log_softmax(Var a);

  // Reductions and reshaping.
  Var sum(Var a);      // 1 x 1
  Var mean(Var a);     // 1 x 1
  Var row_sum(Var a);  // n x 1
  Var pick(Var a, std::span<const int> columns);  // n x 1, a(i, columns[i])
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var a, int start, int count);
  Var slice_rows(Var a, int start, int count);
  Var gather_rows(Var a, std::span<const int> rows);  // out.row(i) = a.row(rows[i])
  Var sum_row_groups(Var a, int group);  // sums each run of `group` consecutive rows

  // Forward value of `hard`, gradient routed into `soft` unchanged.
  Var straight_through(Var soft, Matrix hard);
  // Same value, no gradient flows back through it.
  Var stop_gradient(Var a);

  // Reverse pass from a 1 x 1 output. Parameters on branches that do not
  // reach the output are absent from the result.
  GradientMap backward(Var output);

 private:
  using Backprop = std::function<void(Tape&, const Matrix& grad)>;

  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    Backprop backprop;
  };

  void check(Var v) const;
  Var push(Matrix value, bool requires_grad, Backprop backprop);
  bool needs(Var v) const { return nodes_[static_cast<std::size_t>(v.id_)].requires_grad; }
  const Matrix& val(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  template <typename Expr>
  void accumulate(int id, const Expr& g) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }

  std::vector<Node> nodes_;
};

// Numerically stable row-wise helpers shared by tape and tape-free paths.
Matrix RowSoftmax(const Matrix& logits);
Matrix RowLogSoftmax(const Matrix& logits);

}  // namespace temarl

#endif  // TEMARL_AUTODIFF_H_
