#ifndef TEMARL_REPLAY_BUFFER_H_
#define TEMARL_REPLAY_BUFFER_H_

#include <cstddef>
#include <vector>

#include "temarl/autodiff.h"
#include "temarl/gumbel.h"
#include "temarl/random.h"

namespace temarl {

struct AgentSpec {
  int obs_dim = 0;
  int action_dim = 0;
};

// One environment transition for all agents.
struct Transition {
  std::vector<Vector> obs;
  std::vector<OneHot> actions;
  double reward = 0.0;
  std::vector<Vector> next_obs;
};

// Column-stacked view of a sampled set of transitions; one matrix per agent.
struct Minibatch {
  std::vector<Matrix> obs;
  std::vector<Matrix> actions;  // one-hot rows
  Vector reward;
  std::vector<Matrix> next_obs;

  Eigen::Index size() const { return reward.size(); }
  // Selects a subset of rows (used for smaller estimator batches).
  Minibatch head(Eigen::Index rows) const;
};

// Bounded FIFO of transitions with uniform sampling. Rows are packed into one
// contiguous array; memory grows with use up to `capacity` rows.
class ReplayBuffer {
 public:
  ReplayBuffer(std::vector<AgentSpec> agents, std::size_t capacity);

  void add(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const std::vector<AgentSpec>& agents() const { return agents_; }

  // `i` counts from the oldest stored transition.
  Transition at(std::size_t i) const;

  // Uniform sample of `count` distinct transitions.
  Minibatch sample(std::size_t count, Rng& rng) const;
  Minibatch gather(const std::vector<std::size_t>& logical_indices) const;

 private:
  std::size_t physical(std::size_t logical) const;

  std::vector<AgentSpec> agents_;
  std::size_t capacity_;
  std::size_t width_ = 0;
  std::size_t size_ = 0;
  std::size_t next_ = 0;  // physical slot written next
  std::vector<double> data_;
};

}  // namespace temarl

#endif  // TEMARL_REPLAY_BUFFER_H_
