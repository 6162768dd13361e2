#ifndef TEMARL_ERRORS_H_
#define TEMARL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace temarl {

// Raised when a caller breaks a documented precondition (shapes, ranges,
// malformed inputs). These indicate programming errors, not bad luck.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Raised when a numerical quantity produced during learning becomes
// non-finite. The message names the offending parameter or network.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by iterative solvers that hit their iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double lower, double upper)
      : std::runtime_error(what), lower_(lower), upper_(upper) {}

  double lower() const { return lower_; }
  double upper() const { return upper_; }

 private:
  double lower_;
  double upper_;
};

inline void Require(bool condition, const std::string& message) {
  if (!condition) throw ContractViolation(message);
}

}  // namespace temarl

#endif  // TEMARL_ERRORS_H_
