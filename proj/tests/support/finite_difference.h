#ifndef TEMARL_TESTS_FINITE_DIFFERENCE_H_
#define TEMARL_TESTS_FINITE_DIFFERENCE_H_

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "temarl/autodiff.h"

namespace temarl::testing {

// Central differences of a scalar function of the listed parameters, one
// matrix per parameter. Each entry is perturbed in place and restored.
inline std::vector<Matrix> CentralDifference(const std::function<double()>& f, std::span<Parameter* const> params,
                                             double h = 1e-5) {
  std::vector<Matrix> out;
  for (Parameter* p : params) {
    Matrix g(p->value.rows(), p->value.cols());
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double& x = p->value.data()[i];
      const double saved = x;
      x = saved + h;
      const double up = f();
      x = saved - h;
      const double down = f();
      x = saved;
      g.data()[i] = (up - down) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

// Same for an explicit input matrix.
inline Matrix CentralDifference(const std::function<double(const Matrix&)>& f, const Matrix& at, double h = 1e-5) {
  Matrix x = at;
  Matrix g(at.rows(), at.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + h;
    const double up = f(x);
    x.data()[i] = saved - h;
    const double down = f(x);
    x.data()[i] = saved;
    g.data()[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// ||a - n|| / max(||a||, ||n||) over all parameters jointly; 0 when both vanish.
inline double RelativeError(const GradientMap& analytic, std::span<Parameter* const> params,
                            const std::vector<Matrix>& numeric) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix* a = analytic.find(*params[i]);
    const Matrix zero = Matrix::Zero(numeric[i].rows(), numeric[i].cols());
    const Matrix& av = a ? *a : zero;
    diff += (av - numeric[i]).squaredNorm();
    na += av.squaredNorm();
    nn += numeric[i].squaredNorm();
  }
  const double scale = std::sqrt(std::max(na, nn));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

inline double RelativeError(const Matrix& analytic, const Matrix& numeric) {
  const double scale = std::max(analytic.norm(), numeric.norm());
  return scale == 0.0 ? 0.0 : (analytic - numeric).norm() / scale;
}

}  // namespace temarl::testing

#endif  // TEMARL_TESTS_FINITE_DIFFERENCE_H_
