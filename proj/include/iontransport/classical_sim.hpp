#pragma once

#include <cstdint>
#include <vector>

#include "iontransport/core_model.hpp"
#include "iontransport/protocols.hpp"

namespace iontransport {

struct ClassicalState {
  double q1; // m, right-hand ion
  double q2; // m
  double p1; // kg m/s
  double p2; // kg m/s
  double t;  // s
};

struct ClassicalRun {
  ClassicalState final_state;
  double E_exc;                 // J, total energy minus equilibrium energy
  double energy_drift_estimate; // J, frozen-trap drift over one base period
  std::uint64_t steps;          // accepted integrator steps over [0, T]
};

// Laboratory-frame anharmonic dynamics of both ions: harmonic wells of
// stiffness u0 (1+lambda) centered on Q0(t) plus the full Coulomb repulsion.
// Starts at rest at the lambda-consistent equilibrium around Q0(0);
// E_exc is measured against the equilibrium energy at Q0(T).
// Embedded Runge-Kutta 5(4), rtol 1e-11, atol 1e-11 * l (positions) and
// 1e-11 * m1 omega1 l (momenta).
ClassicalRun simulate(const Protocol& p, const IonPair& pair,
                      const TrapSpec& trap);

// Potential energy at the equilibrium configuration for a well centered at
// Q0. Independent of Q0 (rigid translation); equals 3 C_c / (2 l_p).
double equilibrium_energy(const IonPair& pair, const TrapSpec& trap,
                          double Q0);

struct BreakdownRow {
  double T_over_T0;
  ProtocolKind protocol;
  double E_exc_J;
  double E_exc_hbarOmega1;
  std::uint64_t steps;
  double drift; // relative, per base period
  bool ok;      // false if this grid point failed to integrate
};

// E_exc(T) per protocol over a T grid (values in seconds); protocols are
// re-designed at every T. Failures are recorded and the scan continues.
std::vector<BreakdownRow> harmonic_breakdown_scan(
    const std::vector<ProtocolKind>& kinds, const IonPair& pair,
    const TrapSpec& trap_base, const std::vector<double>& T_grid,
    unsigned threads = 1);

} // namespace iontransport
