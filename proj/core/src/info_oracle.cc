#include "temarl/info_oracle.h"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "temarl/errors.h"

namespace temarl {

void ValidateChannel(const Matrix& channel) {
  Require(channel.rows() >= 1 && channel.cols() >= 1, "channel must be non-empty");
  Require(channel.allFinite() && (channel.array() >= 0.0).all(), "channel entries must be finite and >= 0");
  for (Eigen::Index i = 0; i < channel.rows(); ++i) {
    Require(std::abs(channel.row(i).sum() - 1.0) <= 1e-9,
            "channel row " + std::to_string(i) + " does not sum to 1");
  }
}

void ValidateJoint(const Matrix& joint) {
  Require(joint.rows() >= 1 && joint.cols() >= 1, "joint distribution must be non-empty");
  Require(joint.allFinite() && (joint.array() >= 0.0).all(), "joint entries must be finite and >= 0");
  Require(std::abs(joint.sum() - 1.0) <= 1e-9, "joint distribution does not sum to 1");
}

Matrix JointDistribution(const Matrix& channel, const Vector& input) {
  ValidateChannel(channel);
  Require(input.size() == channel.rows(), "input distribution length must match channel inputs");
  Require((input.array() >= 0.0).all() && std::abs(input.sum() - 1.0) <= 1e-9,
          "input is not a probability vector");
  return input.asDiagonal() * channel;
}

double ExactMi(const Matrix& joint) {
  ValidateJoint(joint);
  const Vector px = joint.rowwise().sum();
  const RowVector py = joint.colwise().sum();
  double mi = 0.0;
  for (Eigen::Index x = 0; x < joint.rows(); ++x) {
    for (Eigen::Index y = 0; y < joint.cols(); ++y) {
      const double p = joint(x, y);
      if (p > 0.0) mi += p * std::log(p / (px(x) * py(y)));
    }
  }
  return mi;
}

double NatsToBits(double nats) { return nats / std::numbers::ln2; }

namespace {

// D(x) = KL(P(.|x) || q) with 0 ln 0 = 0.
Vector Divergences(const Matrix& channel, const RowVector& q) {
  Vector d = Vector::Zero(channel.rows());
  for (Eigen::Index x = 0; x < channel.rows(); ++x) {
    for (Eigen::Index y = 0; y < channel.cols(); ++y) {
      const double p = channel(x, y);
      if (p > 0.0) d(x) += p * std::log(p / q(y));
    }
  }
  return d;
}

}  // namespace

CapacityResult BlahutArimoto(const Matrix& channel, double tol, int max_iter) {
  ValidateChannel(channel);
  Require(tol > 0.0, "tolerance must be positive");
  Require(max_iter >= 1, "max_iter must be >= 1");
  CapacityResult res;
  res.input = Vector::Constant(channel.rows(), 1.0 / static_cast<double>(channel.rows()));
  res.lower = -std::numeric_limits<double>::infinity();
  res.upper = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    const RowVector q = res.input.transpose() * channel;
    const Vector d = Divergences(channel, q);
    const double shift = d.maxCoeff();
    const Vector weighted = res.input.cwiseProduct((d.array() - shift).exp().matrix());
    const double total = weighted.sum();
    // Keep the bracket monotone: both ends are valid bounds at every step.
    res.lower = std::max(res.lower, shift + std::log(total));
    res.upper = std::min(res.upper, shift);
    res.iterations = it;
    if (res.upper - res.lower < tol) {
      res.capacity = res.upper;
      return res;
    }
    res.input = weighted / total;
  }
  throw ConvergenceError("Blahut-Arimoto did not converge in " + std::to_string(max_iter) +
                             " iterations; capacity in [" + std::to_string(res.lower) + ", " +
                             std::to_string(res.upper) + "]",
                         res.lower, res.upper);
}

TabularChannel Tabularize(const DenseNet& source_policy, const Vector& source_obs, const DenseNet& target_policy,
                          const std::function<Vector(int)>& target_obs, bool greedy) {
  constexpr int kMaxSymbols = 4096;
  const int k = source_policy.output_dim();
  Require(k >= 1 && k <= kMaxSymbols, "source action set is not small enough to enumerate");
  Require(static_cast<bool>(target_obs), "a target observation map is required");
  TabularChannel out;
  const Vector logits = source_policy.forward(source_obs);
  out.input = RowSoftmax(logits.transpose()).transpose();
  out.channel.resize(k, target_policy.output_dim());
  for (int a = 0; a < k; ++a) {
    const Vector o = target_obs(a);
    Require(o.size() == target_policy.input_dim(),
            "target observation for symbol " + std::to_string(a) + " has the wrong width");
    const Vector l = target_policy.forward(o);
    if (greedy) {
      Eigen::Index best = 0;
      l.maxCoeff(&best);
      out.channel.row(a).setZero();
      out.channel(a, best) = 1.0;
    } else {
      out.channel.row(a) = RowSoftmax(l.transpose());
    }
  }
  return out;
}

Matrix ReadChannelCsv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t')) ++end;
      if (end == cell.c_str() || (end && *end != '\0')) {
        numeric = false;
        break;
      }
      values.push_back(v);
    }
    if (!numeric) {
      Require(first, "channel CSV: non-numeric row after the header");
      first = false;
      continue;
    }
    first = false;
    Require(rows.empty() || values.size() == rows[0].size(), "channel CSV: ragged rows");
    rows.push_back(std::move(values));
  }
  Require(!rows.empty(), "channel CSV: no rows");
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  ValidateChannel(m);
  return m;
}

Matrix LoadChannelCsv(const std::string& path) {
  std::ifstream in(path);
  Require(in.good(), "cannot open channel CSV '" + path + "'");
  return ReadChannelCsv(in);
}

}  // namespace temarl
