#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace snewton {

struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Input outside the natural domain of an objective (e.g. entropy at u <= 0).
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Right-hand side detectably outside range(H); the pseudo-inverse step is not
/// well defined.
struct RangeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NotPSDError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when an inner subproblem solve cannot reach the requested accuracy.
/// Carries the best step found so the caller can still inspect it.
class InnerSolverError : public std::runtime_error {
 public:
  InnerSolverError(const std::string& what, Eigen::VectorXd best_step, double best_theta)
      : std::runtime_error(what), best_step_(std::move(best_step)), best_theta_(best_theta) {}
  const Eigen::VectorXd& best_step() const { return best_step_; }
  double best_theta() const { return best_theta_; }

 private:
  Eigen::VectorXd best_step_;
  double best_theta_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct EmptyDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InsufficientSamples : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnboundedEta : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace snewton
