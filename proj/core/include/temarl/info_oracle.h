#ifndef TEMARL_INFO_ORACLE_H_
#define TEMARL_INFO_ORACLE_H_

#include <functional>
#include <iosfwd>
#include <string>

#include "temarl/autodiff.h"
#include "temarl/dense_net.h"

namespace temarl {

// Exact information quantities for small discrete channels, in nats.

// Row-stochastic P(out | in) within 1e-9 and non-negative.
void ValidateChannel(const Matrix& channel);
// Non-negative with total mass 1 within 1e-9.
void ValidateJoint(const Matrix& joint);

// p(x, y) = input(x) P(y | x).
Matrix JointDistribution(const Matrix& channel, const Vector& input);

// sum p(x,y) ln[p(x,y) / (p(x) p(y))] with 0 ln 0 = 0.
double ExactMi(const Matrix& joint);

double NatsToBits(double nats);

struct CapacityResult {
  double capacity = 0.0;  // upper end of the final bracket
  double lower = 0.0;
  double upper = 0.0;
  Vector input;  // achieving input distribution
  int iterations = 0;
};

// Blahut-Arimoto alternating maximization. After every iteration the
// capacity is bracketed by
//   lower = ln sum_x r(x) exp(D(x)),  upper = max_x D(x),
//   D(x) = KL(P(.|x) || sum_x' r(x') P(.|x')).
// Stops when upper - lower < tol; throws ConvergenceError carrying the
// bracket after max_iter iterations.
CapacityResult BlahutArimoto(const Matrix& channel, double tol = 1e-9, int max_iter = 10000);

struct TabularChannel {
  Matrix channel;  // P(a'^j | a^k)
  Vector input;    // the source policy's distribution over a^k
};

// Enumerates a^k -> o'^j -> a'^j for a frozen source policy evaluated at
// `source_obs` and a target policy fed `target_obs(a^k)`. With `greedy`
// each row is the target's argmax one-hot instead of its softmax.
TabularChannel Tabularize(const DenseNet& source_policy, const Vector& source_obs, const DenseNet& target_policy,
                          const std::function<Vector(int)>& target_obs, bool greedy = false);

// Channel matrix as CSV: one row per input symbol, comma-separated
// probabilities. A first line that does not parse as numbers is a header.
Matrix ReadChannelCsv(std::istream& in);
Matrix LoadChannelCsv(const std::string& path);

}  // namespace temarl

#endif  // TEMARL_INFO_ORACLE_H_
