#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dualscale {

/// Bad caller input: sizes, ranges, malformed plans.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite input to a special function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A covariance had an eigenvalue below the PSD tolerance.
class NotPsdError : public std::runtime_error {
 public:
  NotPsdError(const std::string& what, double min_eigenvalue)
      : std::runtime_error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// Broken internal invariant (quadrature failure, singular solve).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Angle not identifiable from the echo (zero Fisher information).
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Beam direction undefined because tr(C_h) vanished for some user.
class DegenerateBeamError : public std::runtime_error {
 public:
  DegenerateBeamError(const std::string& what, std::size_t user)
      : std::runtime_error(what), user_(user) {}
  std::size_t user() const noexcept { return user_; }

 private:
  std::size_t user_;
};

/// beta*R - R_r is not PSD: the sensing duration is too short for the
/// corrected correlation to be a covariance.
class SensingTooCoarse : public NotPsdError {
 public:
  using NotPsdError::NotPsdError;
};

/// No sensing duration inside the subframe meets every user's accuracy
/// requirement and still leaves a communication block.
class InfeasibleSensing : public std::runtime_error {
 public:
  InfeasibleSensing(const std::string& what, std::size_t binding_user, double required_time)
      : std::runtime_error(what), binding_user_(binding_user), required_time_(required_time) {}
  std::size_t binding_user() const noexcept { return binding_user_; }
  double required_time() const noexcept { return required_time_; }

 private:
  std::size_t binding_user_;
  double required_time_;
};

/// A frame plan that violates the subframe constraints.
class PlanError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive search asked to run beyond its size limits.
class RefusalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Scenario document problem; field() names the offending key path.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace dualscale
