#include "temarl/replay_buffer.h"

#include <algorithm>
#include <unordered_set>

#include "temarl/errors.h"

namespace temarl {

Minibatch Minibatch::head(Eigen::Index rows) const {
  Require(rows >= 0 && rows <= size(), "Minibatch::head: row count out of range");
  Minibatch out;
  for (const Matrix& m : obs) out.obs.push_back(m.topRows(rows));
  for (const Matrix& m : actions) out.actions.push_back(m.topRows(rows));
  for (const Matrix& m : next_obs) out.next_obs.push_back(m.topRows(rows));
  out.reward = reward.head(rows);
  return out;
}

ReplayBuffer::ReplayBuffer(std::vector<AgentSpec> agents, std::size_t capacity)
    : agents_(std::move(agents)), capacity_(capacity) {
  Require(capacity_ > 0, "replay capacity must be positive");
  Require(!agents_.empty(), "replay buffer needs at least one agent");
  for (const AgentSpec& a : agents_) {
    Require(a.obs_dim > 0 && a.action_dim > 0, "agent dimensions must be positive");
    width_ += static_cast<std::size_t>(2 * a.obs_dim + a.action_dim);
  }
  width_ += 1;
}

std::size_t ReplayBuffer::physical(std::size_t logical) const {
  Require(logical < size_, "replay index out of range");
  if (size_ < capacity_) return logical;
  return (next_ + logical) % capacity_;
}

void ReplayBuffer::add(const Transition& t) {
  Require(t.obs.size() == agents_.size() && t.next_obs.size() == agents_.size() &&
              t.actions.size() == agents_.size(),
          "transition agent count mismatch");
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    Require(t.obs[i].size() == agents_[i].obs_dim && t.next_obs[i].size() == agents_[i].obs_dim,
            "transition observation width mismatch for agent " + std::to_string(i));
    Require(t.actions[i].size() == agents_[i].action_dim,
            "transition action width mismatch for agent " + std::to_string(i));
  }
  if (size_ < capacity_ && data_.size() < (size_ + 1) * width_) data_.resize((size_ + 1) * width_);
  double* row = data_.data() + next_ * width_;
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    for (Eigen::Index k = 0; k < t.obs[i].size(); ++k) *row++ = t.obs[i](k);
    for (int k = 0; k < agents_[i].action_dim; ++k) *row++ = (k == t.actions[i].index()) ? 1.0 : 0.0;
    for (Eigen::Index k = 0; k < t.next_obs[i].size(); ++k) *row++ = t.next_obs[i](k);
  }
  *row = t.reward;
  next_ = (next_ + 1) % capacity_;
  if (size_ < capacity_) ++size_;
}

Transition ReplayBuffer::at(std::size_t i) const {
  const double* row = data_.data() + physical(i) * width_;
  Transition t;
  for (const AgentSpec& a : agents_) {
    t.obs.emplace_back(Eigen::Map<const Vector>(row, a.obs_dim));
    row += a.obs_dim;
    int idx = 0;
    for (int k = 0; k < a.action_dim; ++k) {
      if (row[k] == 1.0) idx = k;
    }
    t.actions.emplace_back(a.action_dim, idx);
    row += a.action_dim;
    t.next_obs.emplace_back(Eigen::Map<const Vector>(row, a.obs_dim));
    row += a.obs_dim;
  }
  t.reward = *row;
  return t;
}

Minibatch ReplayBuffer::gather(const std::vector<std::size_t>& logical_indices) const {
  const auto n = static_cast<Eigen::Index>(logical_indices.size());
  Minibatch b;
  for (const AgentSpec& a : agents_) {
    b.obs.emplace_back(n, a.obs_dim);
    b.actions.emplace_back(n, a.action_dim);
    b.next_obs.emplace_back(n, a.obs_dim);
  }
  b.reward.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double* row = data_.data() + physical(logical_indices[static_cast<std::size_t>(r)]) * width_;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
      const AgentSpec& a = agents_[i];
      b.obs[i].row(r) = Eigen::Map<const RowVector>(row, a.obs_dim);
      row += a.obs_dim;
      b.actions[i].row(r) = Eigen::Map<const RowVector>(row, a.action_dim);
      row += a.action_dim;
      b.next_obs[i].row(r) = Eigen::Map<const RowVector>(row, a.obs_dim);
      row += a.obs_dim;
    }
    b.reward(r) = *row;
  }
  return b;
}

Minibatch ReplayBuffer::sample(std::size_t count, Rng& rng) const {
  Require(count >= 1, "minibatch size must be >= 1");
  Require(count <= size_, "cannot sample " + std::to_string(count) + " distinct transitions from " +
                              std::to_string(size_));
  // Floyd's algorithm: `count` distinct indices in O(count).
  std::vector<std::size_t> picked;
  picked.reserve(count);
  std::unordered_set<std::size_t> seen;
  seen.reserve(count * 2);
  for (std::size_t j = size_ - count; j < size_; ++j) {
    const std::size_t r = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    if (seen.insert(r).second) {
      picked.push_back(r);
    } else {
      seen.insert(j);
      picked.push_back(j);
    }
  }
  // Floyd's order is biased toward older slots; callers may take a prefix.
  std::shuffle(picked.begin(), picked.end(), rng);
  return gather(picked);
}

}  // namespace temarl
