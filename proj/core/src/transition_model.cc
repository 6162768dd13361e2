#include "temarl/transition_model.h"

#include <cmath>
#include <numbers>

#include "temarl/errors.h"

namespace temarl {

int JointLayout::obs_offset(int agent) const {
  Require(agent >= 0 && agent < num_agents(), "agent index out of range");
  int off = 0;
  for (int i = 0; i < agent; ++i) off += agents[static_cast<std::size_t>(i)].obs_dim;
  return off;
}

int JointLayout::action_offset(int agent) const {
  Require(agent >= 0 && agent < num_agents(), "agent index out of range");
  int off = 0;
  for (int i = 0; i < agent; ++i) off += agents[static_cast<std::size_t>(i)].action_dim;
  return off;
}

int JointLayout::obs_dim() const {
  int d = 0;
  for (const AgentSpec& a : agents) d += a.obs_dim;
  return d;
}

int JointLayout::action_dim() const {
  int d = 0;
  for (const AgentSpec& a : agents) d += a.action_dim;
  return d;
}

Matrix ConcatCols(const std::vector<Matrix>& blocks) {
  Require(!blocks.empty(), "nothing to concatenate");
  Eigen::Index cols = 0;
  for (const Matrix& b : blocks) {
    Require(b.rows() == blocks[0].rows(), "concatenated blocks differ in row count");
    cols += b.cols();
  }
  Matrix out(blocks[0].rows(), cols);
  Eigen::Index c = 0;
  for (const Matrix& b : blocks) {
    out.middleCols(c, b.cols()) = b;
    c += b.cols();
  }
  return out;
}

TransitionModel::TransitionModel(JointLayout layout, const TransitionModelConfig& config, Rng& rng)
    : layout_(std::move(layout)), config_(config) {
  Require(config.min_log_variance < config.max_log_variance, "log-variance clamp range is empty");
  const int d = layout_.obs_dim();
  net_ = DenseNet("transition", {d + layout_.action_dim(), config.hidden, config.hidden, 2 * d}, Activation::kRelu,
                  Activation::kIdentity, rng);
  opt_ = AdamState(net_.parameters(), config.adam);
}

namespace {

Matrix ModelInput(const JointLayout& layout, const Matrix& obs, const Matrix& actions) {
  Require(obs.cols() == layout.obs_dim(), "transition model: joint observation width mismatch");
  Require(actions.cols() == layout.action_dim(), "transition model: joint action width mismatch");
  Require(obs.rows() == actions.rows(), "transition model: row mismatch");
  Matrix x(obs.rows(), obs.cols() + actions.cols());
  x << obs, actions;
  return x;
}

}  // namespace

Matrix TransitionModel::mean(const Matrix& obs, const Matrix& actions) const {
  const Matrix out = net_.forward(ModelInput(layout_, obs, actions));
  return obs + out.leftCols(obs.cols());
}

Matrix TransitionModel::log_variance(const Matrix& obs, const Matrix& actions) const {
  const Matrix out = net_.forward(ModelInput(layout_, obs, actions));
  return out.rightCols(obs.cols()).cwiseMax(config_.min_log_variance).cwiseMin(config_.max_log_variance);
}

Matrix TransitionModel::sample(const Matrix& obs, const Matrix& actions, Rng& rng) const {
  const Matrix out = net_.forward(ModelInput(layout_, obs, actions));
  const Eigen::Index d = obs.cols();
  const Matrix logvar = out.rightCols(d).cwiseMax(config_.min_log_variance).cwiseMin(config_.max_log_variance);
  Matrix eps(obs.rows(), d);
  // Box-Muller pairs.
  double* e = eps.data();
  const Eigen::Index size = eps.size();
  for (Eigen::Index i = 0; i < size; i += 2) {
    const double r = std::sqrt(-2.0 * std::log(UniformOpen(rng)));
    const double theta = 2.0 * std::numbers::pi * UniformOpen(rng);
    e[i] = r * std::cos(theta);
    if (i + 1 < size) e[i + 1] = r * std::sin(theta);
  }
  return obs + out.leftCols(d) + (0.5 * logvar.array()).exp().matrix().cwiseProduct(eps);
}

Var TransitionModel::log_likelihood(Tape& tape, const Matrix& obs, const Matrix& actions,
                                    const Matrix& next_obs) {
  Require(next_obs.rows() == obs.rows() && next_obs.cols() == obs.cols(),
          "transition model: next observation shape mismatch");
  const int d = static_cast<int>(obs.cols());
  Var out = net_.forward(tape, tape.constant(ModelInput(layout_, obs, actions)));
  Var delta = tape.slice_cols(out, 0, d);
  Var logvar = tape.clamp(tape.slice_cols(out, d, d), config_.min_log_variance, config_.max_log_variance);
  // -0.5 * [ (x - mu)^2 / var + logvar + ln 2 pi ], mu = o + delta
  Var resid = tape.sub(tape.constant(next_obs - obs), delta);
  Var scaled = tape.mul(tape.square(resid), tape.exp(tape.scale(logvar, -1.0)));
  Var per_row = tape.row_sum(tape.add(scaled, logvar));
  Var ll = tape.add_scalar(tape.scale(per_row, -0.5), -0.5 * d * std::log(2.0 * std::numbers::pi));
  return tape.mean(ll);
}

double TransitionModel::fit(const Matrix& obs, const Matrix& actions, const Matrix& next_obs) {
  Tape tape;
  Var ll = log_likelihood(tape, obs, actions, next_obs);
  const double value = tape.scalar(ll);
  if (!std::isfinite(value)) throw TrainingError("transition model: non-finite log-likelihood");
  GradientMap grads = tape.backward(tape.scale(ll, -1.0));
  AdamStep(opt_, net_.parameters(), grads);
  return value;
}

double TransitionModel::fit(const Minibatch& batch) {
  return fit(ConcatCols(batch.obs), ConcatCols(batch.actions), ConcatCols(batch.next_obs));
}

}  // namespace temarl
