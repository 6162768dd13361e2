#ifndef TEMARL_SOCIAL_INFLUENCE_H_
#define TEMARL_SOCIAL_INFLUENCE_H_

#include "temarl/autodiff.h"
#include "temarl/dense_net.h"
#include "temarl/transition_model.h"

namespace temarl {

// KL( actual || sum_i prior(i) * counterfactual.row(i) ), in nats.
// `counterfactual` has one row per alternative source action.
double InfluenceKl(const RowVector& actual, const Matrix& counterfactual, const RowVector& prior);

// Counterfactual influence of agent `source` on agent `target` for each row of
// a batch of joint observations and joint actions: the target's next-action
// distribution given the source's actual action, against the mixture over
// the source's alternatives. Successor observations come from the model's
// mean; the target keeps its recorded action in every counterfactual.
//
// The prior over alternatives is the source's own policy at o^source.
Vector SocialInfluence(const Matrix& obs, const Matrix& actions, int source, int target,
                       const DenseNet& source_policy, const DenseNet& target_policy, const SuccessorModel& model);

// Same with an explicit per-row prior (n x |A^source|).
Vector SocialInfluence(const Matrix& obs, const Matrix& actions, int source, int target, const Matrix& prior,
                       const DenseNet& target_policy, const SuccessorModel& model);

}  // namespace temarl

#endif  // TEMARL_SOCIAL_INFLUENCE_H_
