#ifndef TEMARL_EMPOWERMENT_H_
#define TEMARL_EMPOWERMENT_H_

#include <vector>

#include "temarl/autodiff.h"
#include "temarl/dense_net.h"
#include "temarl/optim.h"
#include "temarl/random.h"
#include "temarl/transition_model.h"

namespace temarl {

// How the expectations inside the bound are formed.
//   kEnumerate: exact sums over the source action a^k (weighted by the
//     behavior policy), the target's own action a^j and its next action a'^j
//     (weighted by its policy); only o' is sampled from the successor model.
//   kSample: one draw of every random variable per Monte-Carlo sample, with
//     score-function terms for the discrete draws.
enum class EstimatorMode { kEnumerate, kSample };

struct EmpowermentConfig {
  int hidden = 64;
  EstimatorMode mode = EstimatorMode::kEnumerate;
  int mc_samples = 4;       // successor draws per element in the bound
  int shaping_samples = 1;  // successor draws when shaping rewards
  // Feeds o' to the decoder as well as (o, a'^j). Off by default: o' carries
  // the source's message verbatim, so the decoder can read a^k off it and
  // the bound stops measuring the a^k -> a'^j channel.
  bool decoder_sees_next_obs = false;
  double grad_clip = 0.0;  // <= 0 disables
  AdamConfig adam;
};

// Variational lower bound on I(A'^j ; A^k | o), the potential influence of
// agent k's action on agent j's next action:
//
//   E[ ln q(a^k | o, a'^j) - ln w(a^k | o^k) ],
//   a^k ~ w(.|o^k), a^j ~ pi_j(.|o^j), o' ~ p(.|o, a), a'^j ~ pi_j(.|o'^j)
//
// The behavior policy w and the decoder q belong to the estimator; pi_j is the
// agent's actor (logits) and is passed in.
class EmpowermentEstimator {
 public:
  EmpowermentEstimator(JointLayout layout, int target, int source, const EmpowermentConfig& config, Rng& rng);

  int target() const { return target_; }
  int source() const { return source_; }
  const JointLayout& layout() const { return layout_; }
  const EmpowermentConfig& config() const { return config_; }

  struct Bound {
    Var per_element;  // n x 1, the estimate for each row of o
    Var objective;    // 1 x 1 whose gradient is the bound's gradient
  };

  // Records the bound for joint observations `obs` (n x joint obs width).
  // The policy enters as a constant unless `trainable_policy` (which must be
  // `policy` itself) is given.
  Bound bound(Tape& tape, const Matrix& obs, const DenseNet& policy, const SuccessorModel& model, int samples,
              Rng& rng, DenseNet* trainable_policy = nullptr);

  // Per-row estimate only.
  Vector evaluate(const Matrix& obs, const DenseNet& policy, const SuccessorModel& model, int samples, Rng& rng);

  // One ascent step on the bound for the behavior policy and decoder. When
  // `policy_opt` is given the policy takes an ascent step too, with its own
  // optimizer state (its learning rate sets the strength of that path).
  // Returns the mean bound (pre-step).
  double optimize(const Matrix& obs, DenseNet& policy, AdamState* policy_opt, double policy_clip,
                  const SuccessorModel& model, Rng& rng);

  DenseNet behavior;  // w^k: o^k -> logits over A^k
  DenseNet decoder;   // q: [o, (o'), one-hot a'^j] -> logits over A^k
  AdamState behavior_opt;
  AdamState decoder_opt;

 private:
  JointLayout layout_;
  int target_;
  int source_;
  EmpowermentConfig config_;
};

// beta * sum over estimators of their per-row estimate at `next_obs`.
Vector IntrinsicReward(std::vector<EmpowermentEstimator>& estimators, const Matrix& next_obs,
                       const std::vector<const DenseNet*>& policies, const SuccessorModel& model, double beta,
                       Rng& rng);

// r + beta * sum_j E^j(o'); returns r unchanged when beta is 0.
Vector ShapeReward(const Vector& reward, std::vector<EmpowermentEstimator>& estimators, const Matrix& next_obs,
                   const std::vector<const DenseNet*>& policies, const SuccessorModel& model, double beta,
                   Rng& rng);

}  // namespace temarl

#endif  // TEMARL_EMPOWERMENT_H_
