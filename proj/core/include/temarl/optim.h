#ifndef TEMARL_OPTIM_H_
#define TEMARL_OPTIM_H_

#include <span>
#include <vector>

#include "temarl/autodiff.h"

namespace temarl {

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First/second moment accumulators for an ordered parameter list. The same
// ordering must be passed to every AdamStep call.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const std::vector<const Parameter*>& params, AdamConfig config);
  AdamState(std::span<Parameter* const> params, AdamConfig config);

  const AdamConfig& config() const { return config_; }
  long step() const { return step_; }
  std::size_t size() const { return first_.size(); }
  const Matrix& first_moment(std::size_t i) const { return first_.at(i); }
  const Matrix& second_moment(std::size_t i) const { return second_.at(i); }

 private:
  friend void AdamStep(AdamState&, std::span<Parameter* const>, const GradientMap&);
  AdamConfig config_;
  long step_ = 0;
  std::vector<Matrix> first_;
  std::vector<Matrix> second_;
};

// One bias-corrected Adam update. Parameters without a gradient entry are
// treated as having a zero gradient. Throws TrainingError naming the first
// parameter whose gradient is non-finite; nothing is modified in that case.
void AdamStep(AdamState& state, std::span<Parameter* const> params, const GradientMap& grads);

// target <- (1 - rate) * target + rate * online, elementwise, 0 < rate <= 1.
void PolyakUpdate(std::span<Parameter* const> target, std::span<const Parameter* const> online,
                  double rate);

// Rescales the listed gradients so their joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double ClipGradNorm(GradientMap& grads, std::span<Parameter* const> params, double max_norm);

// Sum of squared differences between two parameter lists.
double SquaredDistance(std::span<const Parameter* const> a, std::span<const Parameter* const> b);

}  // namespace temarl

#endif  // TEMARL_OPTIM_H_
