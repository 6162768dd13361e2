#ifndef TEMARL_TRANSITION_MODEL_H_
#define TEMARL_TRANSITION_MODEL_H_

#include <vector>

#include "temarl/autodiff.h"
#include "temarl/dense_net.h"
#include "temarl/optim.h"
#include "temarl/random.h"
#include "temarl/replay_buffer.h"

namespace temarl {

// Column offsets of each agent's block inside joint (concatenated) observation
// and action rows.
struct JointLayout {
  std::vector<AgentSpec> agents;

  int obs_offset(int agent) const;
  int action_offset(int agent) const;
  int obs_dim() const;
  int action_dim() const;
  int num_agents() const { return static_cast<int>(agents.size()); }
};

Matrix ConcatCols(const std::vector<Matrix>& blocks);

// Anything that maps (joint observation, joint action) rows to successor joint
// observations. The empowerment and influence estimators only see this.
class SuccessorModel {
 public:
  virtual ~SuccessorModel() = default;
  virtual const JointLayout& layout() const = 0;
  virtual Matrix mean(const Matrix& obs, const Matrix& actions) const = 0;
  virtual Matrix sample(const Matrix& obs, const Matrix& actions, Rng& rng) const = 0;
};

struct TransitionModelConfig {
  int hidden = 64;
  double min_log_variance = -8.0;
  double max_log_variance = 4.0;
  AdamConfig adam{1e-3};
};

// Diagonal Gaussian p(o' | o, a). The network emits [delta, log variance];
// the mean is o + delta and the log variance is clamped to the configured
// range.
class TransitionModel : public SuccessorModel {
 public:
  TransitionModel(JointLayout layout, const TransitionModelConfig& config, Rng& rng);

  const JointLayout& layout() const override { return layout_; }
  Matrix mean(const Matrix& obs, const Matrix& actions) const override;
  Matrix sample(const Matrix& obs, const Matrix& actions, Rng& rng) const override;
  Matrix log_variance(const Matrix& obs, const Matrix& actions) const;

  // Mean Gaussian log-density of `next_obs` (per row, summed over columns).
  Var log_likelihood(Tape& tape, const Matrix& obs, const Matrix& actions, const Matrix& next_obs);

  // One Adam step ascending the mean log-likelihood; returns it (pre-step).
  double fit(const Matrix& obs, const Matrix& actions, const Matrix& next_obs);
  double fit(const Minibatch& batch);

  DenseNet& net() { return net_; }
  const DenseNet& net() const { return net_; }
  const TransitionModelConfig& config() const { return config_; }

 private:
  JointLayout layout_;
  TransitionModelConfig config_;
  DenseNet net_;
  AdamState opt_;
};

}  // namespace temarl

#endif  // TEMARL_TRANSITION_MODEL_H_
