#pragma once

#include <string>
#include <utility>

#include "iontransport/constants.hpp"

namespace iontransport {

// Two ions in the same harmonic well. Ion 1 is always the right-hand ion;
// input order is preserved, never sorted by mass.
struct IonPair {
  std::string name1;
  std::string name2;
  double m1; // kg
  double m2; // kg
  double mu; // m2 / m1
};

// Moving-well parameters. omega1 is the angular frequency ion 1 alone would
// have; the spring constant u0 = m1 omega1^2 is shared by both ions, so ion 2
// oscillates at omega2 = omega1 / sqrt(mu). lambda is a constant relative
// miscalibration of u0: the well actually realized has stiffness u0 (1+lambda).
struct TrapSpec {
  double omega1; // rad/s
  double d;      // m, transport distance
  double T;      // s, transport duration
  double lambda; // dimensionless, > -0.99
  double u0;     // N/m, m1 omega1^2 (derived)
};

// Static normal-mode decomposition of the coupled pair, mass-weighted
// coordinates. The +/- vectors (a, b) diagonalize the quadratic expansion of
// trap plus Coulomb potential about the equilibrium separation l.
struct ModeData {
  double a_plus, a_minus;         // mode vector components, a^2 + b^2 = 1
  double b_plus, b_minus;
  double Omega_plus, Omega_minus; // rad/s, Omega_plus > Omega_minus
  double Omega_plus_p, Omega_minus_p; // perturbed, Omega sqrt(1+lambda)
  double l;   // m, equilibrium separation, 2 (C_c / 4 u0)^(1/3)
  double l_p; // m, perturbed separation, l (1+lambda)^(-1/3)
  double c_plus, c_minus; // kg^(1/2), coupling factors sqrt(m1) (a + b sqrt(mu))
};

// Resolve species from the built-in isotope table (Be9, Mg24, Ca40, ...).
// Throws config_error for unknown names.
IonPair make_ion_pair(const std::string& name1, const std::string& name2);

// Same, with explicit masses in atomic mass units (overrides the table;
// names are kept as labels only).
IonPair make_ion_pair_masses(const std::string& name1, const std::string& name2,
                             double m1_amu, double m2_amu);

// Validates ranges (omega1, d, T > 0; lambda > -0.99) and fills u0.
TrapSpec make_trap_spec(const IonPair& pair, double omega1, double d, double T,
                        double lambda);

// Full static decomposition. Pure function of (pair, trap).
ModeData normal_modes(const IonPair& pair, const TrapSpec& trap);

// Equilibrium positions of the two ions for a well centered at Q0, using the
// lambda-consistent separation l_p. Returns (q1, q2), q1 > q2.
std::pair<double, double> equilibrium_positions(const TrapSpec& trap,
                                                const ModeData& modes,
                                                double Q0);

// One period of ion 1, 2 pi / omega1. The natural time unit: transport
// durations are usually quoted as multiples of it.
inline double base_period(const TrapSpec& trap) {
  return 2.0 * std::numbers::pi / trap.omega1;
}

} // namespace iontransport
