#pragma once

#include <numbers>

namespace iontransport {

// CODATA 2018 values, SI units. Single source of truth for the whole library.
namespace codata {
inline constexpr double elementary_charge = 1.602176634e-19;    // C (exact)
inline constexpr double vacuum_permittivity = 8.8541878128e-12; // F/m
inline constexpr double hbar = 1.054571817e-34;                 // J s
inline constexpr double atomic_mass_unit = 1.66053906660e-27;   // kg
inline constexpr double coulomb_constant =
    elementary_charge * elementary_charge /
    (4.0 * std::numbers::pi * vacuum_permittivity);             // N m^2
} // namespace codata

struct Constants {
  double coulomb_constant;  // e^2 / (4 pi eps0), N m^2
  double hbar;              // J s
  double atomic_mass_unit;  // kg
  double elementary_charge; // C
};

inline Constants constants() {
  return Constants{codata::coulomb_constant, codata::hbar,
                   codata::atomic_mass_unit, codata::elementary_charge};
}

} // namespace iontransport
