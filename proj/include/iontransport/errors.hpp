#pragma once

#include <stdexcept>
#include <string>

namespace iontransport {

// Base class for everything thrown on purpose by this library.
struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration: unknown species, out-of-range parameter,
// malformed flag value, precondition violation a caller can fix.
struct config_error : error {
  using error::error;
};

// Argument outside the mathematical domain of an operation
// (e.g. evaluating a trajectory outside [0, T]).
struct domain_error : error {
  using error::error;
};

// Linear design solve failed or is untrustworthy.
struct design_error : error {
  design_error(const std::string& msg, double cond)
      : error(msg), condition_number(cond) {}
  double condition_number;
};

// Quadrature or iteration failed to reach the requested accuracy.
struct numerics_error : error {
  numerics_error(const std::string& msg, double estimate)
      : error(msg), error_estimate(estimate) {}
  double error_estimate;
};

// ODE integration aborted (ion ordering violated, step underflow, ...).
struct integration_error : error {
  integration_error(const std::string& msg, double t, double q1, double q2)
      : error(msg), t(t), q1(q1), q2(q2) {}
  double t, q1, q2;
};

} // namespace iontransport
