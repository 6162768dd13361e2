#include "temarl/optim.h"

#include <cmath>

#include "temarl/errors.h"

namespace temarl {

AdamState::AdamState(const std::vector<const Parameter*>& params, AdamConfig config) : config_(config) {
  Require(config.learning_rate > 0.0, "Adam learning rate must be positive");
  for (const Parameter* p : params) {
    first_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    second_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

AdamState::AdamState(std::span<Parameter* const> params, AdamConfig config)
    : AdamState(std::vector<const Parameter*>(params.begin(), params.end()), config) {}

void AdamStep(AdamState& state, std::span<Parameter* const> params, const GradientMap& grads) {
  Require(params.size() == state.first_.size(), "AdamStep: parameter count differs from state");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    Require(p.value.rows() == state.first_[i].rows() && p.value.cols() == state.first_[i].cols(),
            "AdamStep: shape of '" + p.name + "' differs from its moments");
    if (const Matrix* g = grads.find(p)) {
      Require(g->rows() == p.value.rows() && g->cols() == p.value.cols(),
              "AdamStep: gradient shape mismatch for '" + p.name + "'");
      if (!g->allFinite()) throw TrainingError("non-finite gradient for parameter '" + p.name + "'");
    }
  }
  const AdamConfig& c = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Matrix& m = state.first_[i];
    Matrix& v = state.second_[i];
    if (const Matrix* g = grads.find(p)) {
      m = c.beta1 * m + (1.0 - c.beta1) * *g;
      v = c.beta2 * v + (1.0 - c.beta2) * g->cwiseAbs2();
    } else {
      m *= c.beta1;
      v *= c.beta2;
    }
    p.value.array() -= c.learning_rate * (m.array() / correction1) /
                       ((v.array() / correction2).sqrt() + c.epsilon);
  }
}

void PolyakUpdate(std::span<Parameter* const> target, std::span<const Parameter* const> online,
                  double rate) {
  Require(rate > 0.0 && rate <= 1.0, "Polyak rate must lie in (0, 1]");
  Require(target.size() == online.size(), "PolyakUpdate: parameter count mismatch");
  for (std::size_t i = 0; i < target.size(); ++i) {
    Require(target[i]->value.rows() == online[i]->value.rows() &&
                target[i]->value.cols() == online[i]->value.cols(),
            "PolyakUpdate: shape mismatch for '" + target[i]->name + "'");
    if (rate == 1.0) {
      target[i]->value = online[i]->value;
    } else {
      target[i]->value = (1.0 - rate) * target[i]->value + rate * online[i]->value;
    }
  }
}

double ClipGradNorm(GradientMap& grads, std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) {
    if (const Matrix* g = grads.find(*p)) sq += g->squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    for (const Parameter* p : params) {
      if (Matrix* g = grads.find(*p)) *g *= max_norm / norm;
    }
  }
  return norm;
}

double SquaredDistance(std::span<const Parameter* const> a, std::span<const Parameter* const> b) {
  Require(a.size() == b.size(), "SquaredDistance: parameter count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) total += (a[i]->value - b[i]->value).squaredNorm();
  return total;
}

}  // namespace temarl
