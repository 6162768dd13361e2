#ifndef TEMARL_GUMBEL_H_
#define TEMARL_GUMBEL_H_

#include <vector>

#include "temarl/autodiff.h"
#include "temarl/random.h"

namespace temarl {

// A K-dimensional indicator vector stored by its active index.
class OneHot {
 public:
  OneHot() = default;
  OneHot(int size, int index);

  int size() const { return size_; }
  int index() const { return index_; }
  Vector dense() const;
  bool operator==(const OneHot&) const = default;

 private:
  int size_ = 0;
  int index_ = 0;
};

struct GumbelSample {
  Vector soft;  // softmax((logits + g) / temperature)
  OneHot hard;  // argmax(logits + g)
};

// Standard Gumbel noise, -log(-log(u)) with u ~ U(0, 1).
Matrix SampleGumbel(Eigen::Index rows, Eigen::Index cols, Rng& rng);

GumbelSample GumbelSoftmaxSample(const Vector& logits, double temperature, Rng& rng);

// Same relaxation with caller-supplied noise (lets tests fix the draw).
GumbelSample GumbelSoftmaxWithNoise(const Vector& logits, const Vector& noise, double temperature);

struct GumbelBatch {
  Var action;                // straight-through: one-hot forward, soft backward
  Var soft;                  // the relaxed sample itself
  std::vector<int> indices;  // argmax per row
};

// Batched straight-through Gumbel-Softmax on the tape. `noise` must match the
// logits' shape.
GumbelBatch GumbelSoftmax(Tape& tape, Var logits, const Matrix& noise, double temperature);

// Rows of `indices` expanded into a one-hot matrix with `width` columns.
Matrix OneHotRows(const std::vector<int>& indices, int width);

// Row-wise argmax.
std::vector<int> ArgmaxRows(const Matrix& m);

// Draws one categorical index per row of a row-stochastic matrix.
std::vector<int> SampleCategoricalRows(const Matrix& probs, Rng& rng);

}  // namespace temarl

#endif  // TEMARL_GUMBEL_H_
