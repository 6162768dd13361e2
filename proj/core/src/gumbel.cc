#include "temarl/gumbel.h"

#include <cmath>

#include "temarl/errors.h"

namespace temarl {

OneHot::OneHot(int size, int index) : size_(size), index_(index) {
  Require(size > 0, "OneHot: size must be positive");
  Require(index >= 0 && index < size, "OneHot: index " + std::to_string(index) +
                                          " outside [0, " + std::to_string(size) + ")");
}

Vector OneHot::dense() const {
  Vector v = Vector::Zero(size_);
  if (size_ > 0) v(index_) = 1.0;
  return v;
}

Matrix SampleGumbel(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix g(rows, cols);
  // Column-major fill order; callers rely only on determinism.
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = -std::log(-std::log(UniformOpen(rng)));
  }
  return g;
}

GumbelSample GumbelSoftmaxWithNoise(const Vector& logits, const Vector& noise, double temperature) {
  Require(temperature > 0.0, "Gumbel-Softmax temperature must be positive");
  Require(logits.size() > 0 && logits.size() == noise.size(), "Gumbel-Softmax: noise/logit size mismatch");
  Vector perturbed = logits + noise;
  Eigen::Index best = 0;
  perturbed.maxCoeff(&best);
  Matrix row = (perturbed / temperature).transpose();
  GumbelSample s;
  s.soft = RowSoftmax(row).row(0).transpose();
  s.hard = OneHot(static_cast<int>(logits.size()), static_cast<int>(best));
  return s;
}

GumbelSample GumbelSoftmaxSample(const Vector& logits, double temperature, Rng& rng) {
  Require(temperature > 0.0, "Gumbel-Softmax temperature must be positive");
  Matrix noise = SampleGumbel(logits.size(), 1, rng);
  return GumbelSoftmaxWithNoise(logits, noise.col(0), temperature);
}

GumbelBatch GumbelSoftmax(Tape& tape, Var logits, const Matrix& noise, double temperature) {
  Require(temperature > 0.0, "Gumbel-Softmax temperature must be positive");
  const Eigen::Index rows = tape.value(logits).rows(), cols = tape.value(logits).cols();
  Require(rows == noise.rows() && cols == noise.cols(), "Gumbel-Softmax: noise shape mismatch");
  Var perturbed = tape.add(logits, tape.constant(noise));
  GumbelBatch out;
  out.soft = tape.softmax(tape.scale(perturbed, 1.0 / temperature));
  out.indices = ArgmaxRows(tape.value(perturbed));
  out.action = tape.straight_through(out.soft, OneHotRows(out.indices, static_cast<int>(cols)));
  return out;
}

Matrix OneHotRows(const std::vector<int>& indices, int width) {
  Matrix m = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), width);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    Require(indices[i] >= 0 && indices[i] < width, "OneHotRows: index out of range");
    m(static_cast<Eigen::Index>(i), indices[i]) = 1.0;
  }
  return m;
}

std::vector<int> ArgmaxRows(const Matrix& m) {
  std::vector<int> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Eigen::Index best = 0;
    m.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> SampleCategoricalRows(const Matrix& probs, Rng& rng) {
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double u = UniformOpen(rng);
    int pick = static_cast<int>(probs.cols()) - 1;
    double acc = 0.0;
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      acc += probs(i, j);
      if (u < acc) {
        pick = static_cast<int>(j);
        break;
      }
    }
    out[static_cast<std::size_t>(i)] = pick;
  }
  return out;
}

}  // namespace temarl
