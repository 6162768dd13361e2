#include "temarl/social_influence.h"

#include <cmath>

#include "temarl/errors.h"

namespace temarl {

double InfluenceKl(const RowVector& actual, const Matrix& counterfactual, const RowVector& prior) {
  Require(counterfactual.rows() == prior.size(), "one prior weight per counterfactual required");
  Require(counterfactual.cols() == actual.size(), "counterfactual width differs from the actual distribution");
  const RowVector mixture = prior * counterfactual;
  double kl = 0.0;
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    if (actual(i) > 0.0) kl += actual(i) * std::log(actual(i) / mixture(i));
  }
  if (!std::isfinite(kl)) throw TrainingError("social influence: non-finite KL");
  // Rounding can leave a tiny negative value when the two sides coincide.
  return std::max(kl, 0.0);
}

Vector SocialInfluence(const Matrix& obs, const Matrix& actions, int source, int target, const Matrix& prior,
                       const DenseNet& target_policy, const SuccessorModel& model) {
  const JointLayout& layout = model.layout();
  Require(obs.rows() == actions.rows() && obs.rows() == prior.rows(), "social influence: row mismatch");
  Require(obs.cols() == layout.obs_dim() && actions.cols() == layout.action_dim(),
          "social influence: joint width mismatch");
  Require(source != target, "source and target must differ");
  const int k = layout.agents.at(static_cast<std::size_t>(source)).action_dim;
  const int tgt_dim = layout.agents.at(static_cast<std::size_t>(target)).obs_dim;
  Require(prior.cols() == k, "prior width must match the source's action count");
  const int src_act = layout.action_offset(source);
  const int tgt_obs = layout.obs_offset(target);
  const Eigen::Index n = obs.rows();

  // Row (b, i): the recorded joint action with the source's action replaced by i.
  Matrix all_obs(n * k, obs.cols());
  Matrix all_act(n * k, actions.cols());
  for (Eigen::Index b = 0; b < n; ++b) {
    for (int i = 0; i < k; ++i) {
      const Eigen::Index r = b * k + i;
      all_obs.row(r) = obs.row(b);
      all_act.row(r) = actions.row(b);
      all_act.row(r).segment(src_act, k).setZero();
      all_act(r, src_act + i) = 1.0;
    }
  }
  const Matrix next = model.mean(all_obs, all_act);
  const Matrix probs = RowSoftmax(target_policy.forward(Matrix(next.middleCols(tgt_obs, tgt_dim))));

  Vector out(n);
  for (Eigen::Index b = 0; b < n; ++b) {
    Eigen::Index taken = 0;
    actions.row(b).segment(src_act, k).maxCoeff(&taken);
    const Matrix block = probs.middleRows(b * k, k);
    out(b) = InfluenceKl(block.row(taken), block, prior.row(b));
  }
  return out;
}

Vector SocialInfluence(const Matrix& obs, const Matrix& actions, int source, int target,
                       const DenseNet& source_policy, const DenseNet& target_policy, const SuccessorModel& model) {
  const JointLayout& layout = model.layout();
  const int src_dim = layout.agents.at(static_cast<std::size_t>(source)).obs_dim;
  const Matrix prior =
      RowSoftmax(source_policy.forward(Matrix(obs.middleCols(layout.obs_offset(source), src_dim))));
  return SocialInfluence(obs, actions, source, target, prior, target_policy, model);
}

}  // namespace temarl
