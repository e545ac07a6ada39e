#pragma once

#include <string>
#include <vector>

#include "iontransport/core_model.hpp"

namespace iontransport {

enum class ProtocolKind { cosine, poly14, naive_quintic, cm_only };

std::string to_string(ProtocolKind kind);
ProtocolKind protocol_kind_from_string(const std::string& name);

// An analytic well trajectory Q0(t) on [0, T] with exact first and second
// derivatives. coefficients are dimensionless:
//   cosine, cm_only: beta0..beta4 of
//       Q0(t)/d = beta0 + sum_j beta_j cos((2j-1) pi t / T), j = 1..4
//   poly14, naive_quintic: beta0..betaN of Q0(t)/d = sum_j beta_j s^j, s = t/T
struct Protocol {
  ProtocolKind kind;
  std::vector<double> coefficients;
  TrapSpec trap;
  ModeData modes;              // modes used by the design (zeroed for naive)
  double condition_number = 0; // of the design solve, poly14 only
};

struct TrajectoryPoint {
  double Q0;     // m
  double Q0dot;  // m/s
  double Q0ddot; // m/s^2
};

// Analytic evaluation, never numerical differentiation.
// Throws domain_error for t outside [0, T].
TrajectoryPoint evaluate(const Protocol& p, double t);

// Trigonometric trajectory whose two leading harmonics absorb the boundary
// conditions and whose beta3, beta4 are closed forms in T that cancel the
// first-order excitation integrals of both modes simultaneously.
Protocol design_cosine(const TrapSpec& trap, const ModeData& modes);

// Degree-13 polynomial in s = t/T meeting all 14 design conditions: endpoint
// values and first/second derivatives of Q0, rest state of both mode
// responses at t = T, and the four first-order error-cancellation integrals.
// Solved as a dense 14x14 linear system (rows equilibrated, condition number
// reported on the Protocol; a warning is printed above 1e12).
Protocol design_poly14(const TrapSpec& trap, const ModeData& modes);

// Minimal quintic satisfying only the endpoint conditions. The baseline that
// is neither excitation-free nor robust.
Protocol design_naive(const TrapSpec& trap);

// Single-mode robust design that treats the pair as one particle of mass
// m1 + m2 at the center-of-mass frequency w_cm = sqrt(2 u0 / M), ignoring
// mode coupling: a three-harmonic trigonometric trajectory whose single free
// coefficient cancels the first-order excitation integral at w_cm only.
Protocol design_cm_only(const TrapSpec& trap, const IonPair& pair);

// Center-of-mass frequency used by design_cm_only.
double cm_frequency(const TrapSpec& trap, const IonPair& pair);

} // namespace iontransport
