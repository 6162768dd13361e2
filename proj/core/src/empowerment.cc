#include "temarl/empowerment.h"

#include <cmath>

#include "temarl/errors.h"
#include "temarl/gumbel.h"

namespace temarl {

EmpowermentEstimator::EmpowermentEstimator(JointLayout layout, int target, int source,
                                           const EmpowermentConfig& config, Rng& rng)
    : layout_(std::move(layout)), target_(target), source_(source), config_(config) {
  Require(layout_.num_agents() == 2, "the empowerment estimator supports exactly two agents");
  Require(target >= 0 && target < 2 && source >= 0 && source < 2 && target != source,
          "target and source must be the two distinct agents");
  Require(config.mc_samples >= 1 && config.shaping_samples >= 1, "sample counts must be positive");
  const AgentSpec& src = layout_.agents[static_cast<std::size_t>(source)];
  const AgentSpec& tgt = layout_.agents[static_cast<std::size_t>(target)];
  const std::string tag = "empowerment" + std::to_string(source) + "to" + std::to_string(target);
  const int h = config.hidden;
  behavior = DenseNet(tag + ".behavior", {src.obs_dim, h, h, src.action_dim}, Activation::kRelu,
                      Activation::kIdentity, rng);
  const int decoder_in =
      layout_.obs_dim() * (config.decoder_sees_next_obs ? 2 : 1) + tgt.action_dim;
  decoder = DenseNet(tag + ".decoder", {decoder_in, h, h, src.action_dim}, Activation::kRelu,
                     Activation::kIdentity, rng);
  behavior_opt = AdamState(behavior.parameters(), config.adam);
  decoder_opt = AdamState(decoder.parameters(), config.adam);
}

namespace {

void CheckFinite(const Tape& tape, Var v, const std::string& net) {
  if (!tape.value(v).allFinite()) throw TrainingError("empowerment bound: non-finite output from '" + net + "'");
}

Var Forward(Tape& tape, const DenseNet& net, DenseNet* trainable, Var x) {
  return trainable ? trainable->forward(tape, x) : net.forward_frozen(tape, x);
}

// Rows [obs_row | (next_obs_row) | one-hot(action)] for the decoder.
Matrix DecoderInput(const Matrix& obs, const std::vector<int>& obs_rows, const Matrix* next_obs,
                    const std::vector<int>& actions, int action_dim) {
  const auto n = static_cast<Eigen::Index>(obs_rows.size());
  const Eigen::Index d = obs.cols();
  const Eigen::Index dn = next_obs ? next_obs->cols() : 0;
  Matrix x = Matrix::Zero(n, d + dn + action_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i).head(d) = obs.row(obs_rows[static_cast<std::size_t>(i)]);
    if (next_obs) x.row(i).segment(d, dn) = next_obs->row(i);
    x(i, d + dn + actions[static_cast<std::size_t>(i)]) = 1.0;
  }
  return x;
}

}  // namespace

EmpowermentEstimator::Bound EmpowermentEstimator::bound(Tape& tape, const Matrix& obs, const DenseNet& policy,
                                                        const SuccessorModel& model, int samples, Rng& rng,
                                                        DenseNet* trainable_policy) {
  Require(obs.rows() >= 1, "empowerment bound needs a non-empty batch");
  Require(obs.cols() == layout_.obs_dim(), "empowerment bound: joint observation width mismatch");
  Require(samples >= 1, "empowerment bound needs at least one sample");
  Require(trainable_policy == nullptr || trainable_policy == &policy, "trainable policy must be the policy");
  const AgentSpec& src = layout_.agents[static_cast<std::size_t>(source_)];
  const AgentSpec& tgt = layout_.agents[static_cast<std::size_t>(target_)];
  Require(policy.input_dim() == tgt.obs_dim && policy.output_dim() == tgt.action_dim,
          "empowerment bound: policy shape does not match the target agent");

  const Eigen::Index n = obs.rows();
  const int kk = src.action_dim;
  const int aj = tgt.action_dim;
  const int src_obs = layout_.obs_offset(source_);
  const int tgt_obs = layout_.obs_offset(target_);
  const int src_act = layout_.action_offset(source_);
  const int tgt_act = layout_.action_offset(target_);

  Var w_logits = behavior.forward(tape, tape.constant(obs.middleCols(src_obs, src.obs_dim)));
  CheckFinite(tape, w_logits, behavior.name());
  Var log_w = tape.log_softmax(w_logits);
  Var pi_logits = Forward(tape, policy, trainable_policy, tape.constant(obs.middleCols(tgt_obs, tgt.obs_dim)));
  CheckFinite(tape, pi_logits, policy.name());

  // Rows r enumerate (b, a^k, a^j, s) in enumerate mode and (b, s) in sample
  // mode; b_r, ak_r, aj_r index into them.
  std::vector<int> b_r, ak_r, aj_r;
  if (config_.mode == EstimatorMode::kEnumerate) {
    for (int b = 0; b < n; ++b) {
      for (int a = 0; a < kk; ++a) {
        for (int c = 0; c < aj; ++c) {
          for (int s = 0; s < samples; ++s) {
            b_r.push_back(b);
            ak_r.push_back(a);
            aj_r.push_back(c);
          }
        }
      }
    }
  } else {
    for (int b = 0; b < n; ++b) {
      for (int s = 0; s < samples; ++s) b_r.push_back(b);
    }
    const Matrix w_now = RowSoftmax(tape.value(w_logits));
    const Matrix pi_now = RowSoftmax(tape.value(pi_logits));
    ak_r = SampleCategoricalRows(w_now(b_r, Eigen::indexing::all), rng);
    aj_r = SampleCategoricalRows(pi_now(b_r, Eigen::indexing::all), rng);
  }
  const auto rows = static_cast<Eigen::Index>(b_r.size());

  const Matrix joint_obs = obs(b_r, Eigen::indexing::all);
  Matrix joint_act = Matrix::Zero(rows, layout_.action_dim());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto i = static_cast<std::size_t>(r);
    joint_act(r, src_act + ak_r[i]) = 1.0;
    joint_act(r, tgt_act + aj_r[i]) = 1.0;
  }
  const Matrix next_obs = model.sample(joint_obs, joint_act, rng);
  Require(next_obs.rows() == rows && next_obs.cols() == obs.cols(), "successor model returned the wrong shape");

  Var next_logits = Forward(tape, policy, trainable_policy, tape.constant(next_obs.middleCols(tgt_obs, tgt.obs_dim)));
  CheckFinite(tape, next_logits, policy.name());
  const Matrix* decoder_next = config_.decoder_sees_next_obs ? &next_obs : nullptr;

  Bound out;
  if (config_.mode == EstimatorMode::kEnumerate) {
    Var w = tape.exp(log_w);
    Var entropy = tape.scale(tape.row_sum(tape.mul(w, log_w)), -1.0);
    Var pi = tape.softmax(pi_logits);
    Var next_pi = tape.softmax(next_logits);
    Var w_r = tape.pick(tape.gather_rows(w, b_r), ak_r);
    Var pi_r = tape.pick(tape.gather_rows(pi, b_r), aj_r);

    // ln q(a^k_r | o_b, (o'_r), a') for every a', as rows x aj.
    std::vector<Var> cols;
    if (decoder_next == nullptr) {
      std::vector<int> q_rows, q_act;
      for (int a = 0; a < aj; ++a) {
        for (int b = 0; b < n; ++b) {
          q_rows.push_back(b);
          q_act.push_back(a);
        }
      }
      Var q_logits = decoder.forward(tape, tape.constant(DecoderInput(obs, q_rows, nullptr, q_act, aj)));
      CheckFinite(tape, q_logits, decoder.name());
      Var log_q = tape.log_softmax(q_logits);
      for (int a = 0; a < aj; ++a) {
        cols.push_back(tape.pick(tape.gather_rows(tape.slice_rows(log_q, a * static_cast<int>(n), static_cast<int>(n)), b_r), ak_r));
      }
    } else {
      std::vector<int> q_rows, q_act, q_pick;
      Matrix repeated_next(rows * aj, next_obs.cols());
      for (int a = 0; a < aj; ++a) {
        repeated_next.middleRows(a * rows, rows) = next_obs;
        for (Eigen::Index r = 0; r < rows; ++r) {
          q_rows.push_back(b_r[static_cast<std::size_t>(r)]);
          q_act.push_back(a);
          q_pick.push_back(ak_r[static_cast<std::size_t>(r)]);
        }
      }
      Var q_logits = decoder.forward(tape, tape.constant(DecoderInput(obs, q_rows, &repeated_next, q_act, aj)));
      CheckFinite(tape, q_logits, decoder.name());
      Var picked = tape.pick(tape.log_softmax(q_logits), q_pick);
      for (int a = 0; a < aj; ++a) {
        cols.push_back(tape.slice_rows(picked, a * static_cast<int>(rows), static_cast<int>(rows)));
      }
    }
    Var log_q_r = tape.concat_cols(cols);
    Var inner = tape.row_sum(tape.mul(next_pi, log_q_r));
    Var contrib = tape.scale(tape.mul(tape.mul(inner, pi_r), w_r), 1.0 / samples);
    out.per_element = tape.add(tape.sum_row_groups(contrib, kk * aj * samples), entropy);
    out.objective = tape.mean(out.per_element);
    return out;
  }

  // Sample mode.
  const std::vector<int> next_a = SampleCategoricalRows(RowSoftmax(tape.value(next_logits)), rng);
  Var q_logits = decoder.forward(tape, tape.constant(DecoderInput(obs, b_r, decoder_next, next_a, aj)));
  CheckFinite(tape, q_logits, decoder.name());
  Var log_q = tape.pick(tape.log_softmax(q_logits), ak_r);
  Var log_w_r = tape.pick(tape.gather_rows(log_w, b_r), ak_r);
  Var log_pi_r = tape.pick(tape.gather_rows(tape.log_softmax(pi_logits), b_r), aj_r);
  Var log_next_r = tape.pick(tape.log_softmax(next_logits), next_a);
  Var f = tape.sub(log_q, log_w_r);
  const Matrix& fv = tape.value(f);
  const Matrix advantage = (fv.array() - fv.mean()).matrix();
  Var score = tape.add(tape.add(log_w_r, log_pi_r), log_next_r);
  Var surrogate = tape.add(f, tape.mul(tape.constant(advantage), score));
  out.per_element = tape.scale(tape.sum_row_groups(tape.stop_gradient(f), samples), 1.0 / samples);
  out.objective = tape.mean(surrogate);
  return out;
}

Vector EmpowermentEstimator::evaluate(const Matrix& obs, const DenseNet& policy, const SuccessorModel& model,
                                      int samples, Rng& rng) {
  Tape tape;
  Bound b = bound(tape, obs, policy, model, samples, rng);
  return tape.value(b.per_element).col(0);
}

double EmpowermentEstimator::optimize(const Matrix& obs, DenseNet& policy, AdamState* policy_opt,
                                      double policy_clip, const SuccessorModel& model, Rng& rng) {
  Tape tape;
  Bound b = bound(tape, obs, policy, model, config_.mc_samples, rng, policy_opt ? &policy : nullptr);
  const double value = tape.value(b.per_element).mean();
  if (!std::isfinite(value)) throw TrainingError("empowerment bound: non-finite value");
  GradientMap grads = tape.backward(tape.scale(b.objective, -1.0));
  std::vector<Parameter*> wp = behavior.parameters();
  std::vector<Parameter*> qp = decoder.parameters();
  if (config_.grad_clip > 0.0) {
    ClipGradNorm(grads, wp, config_.grad_clip);
    ClipGradNorm(grads, qp, config_.grad_clip);
  }
  AdamStep(behavior_opt, wp, grads);
  AdamStep(decoder_opt, qp, grads);
  if (policy_opt != nullptr) {
    std::vector<Parameter*> pp = policy.parameters();
    if (policy_clip > 0.0) ClipGradNorm(grads, pp, policy_clip);
    AdamStep(*policy_opt, pp, grads);
  }
  return value;
}

Vector IntrinsicReward(std::vector<EmpowermentEstimator>& estimators, const Matrix& next_obs,
                       const std::vector<const DenseNet*>& policies, const SuccessorModel& model, double beta,
                       Rng& rng) {
  Vector total = Vector::Zero(next_obs.rows());
  if (beta == 0.0) return total;
  for (EmpowermentEstimator& e : estimators) {
    const auto j = static_cast<std::size_t>(e.target());
    Require(j < policies.size() && policies[j] != nullptr, "missing policy for empowerment target agent");
    total += e.evaluate(next_obs, *policies[j], model, e.config().shaping_samples, rng);
  }
  return beta * total;
}

Vector ShapeReward(const Vector& reward, std::vector<EmpowermentEstimator>& estimators, const Matrix& next_obs,
                   const std::vector<const DenseNet*>& policies, const SuccessorModel& model, double beta,
                   Rng& rng) {
  Require(reward.size() == next_obs.rows(), "reward and observation batch differ in length");
  if (beta == 0.0) return reward;
  return reward + IntrinsicReward(estimators, next_obs, policies, model, beta, rng);
}

}  // namespace temarl
