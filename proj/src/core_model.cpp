#include "iontransport/core_model.hpp"

#include <cmath>
#include <map>

#include "iontransport/errors.hpp"

namespace iontransport {

namespace {

// AME2020 atomic masses in u. Compile-time table: reproducible without
// external data files. Electron-mass corrections are far below the accuracy
// that matters here (mu enters through ratios of order unity).
const std::map<std::string, double>& isotope_table() {
  static const std::map<std::string, double> table = {
      {"Be9", 9.0121831},
      {"Mg24", 23.98504170},
      {"Ca40", 39.962590851},
      {"Sr88", 87.9056122},
      {"Yb171", 170.9363302},
  };
  return table;
}

double lookup_mass_amu(const std::string& name) {
  const auto& table = isotope_table();
  auto it = table.find(name);
  if (it == table.end())
    throw config_error("unknown species '" + name +
                       "' (known: Be9, Mg24, Ca40, Sr88, Yb171; "
                       "or pass an explicit mass in amu)");
  return it->second;
}

} // namespace

IonPair make_ion_pair(const std::string& name1, const std::string& name2) {
  return make_ion_pair_masses(name1, name2, lookup_mass_amu(name1),
                              lookup_mass_amu(name2));
}

IonPair make_ion_pair_masses(const std::string& name1, const std::string& name2,
                             double m1_amu, double m2_amu) {
  if (!(m1_amu > 0.0) || !(m2_amu > 0.0))
    throw config_error("ion masses must be positive");
  IonPair pair;
  pair.name1 = name1;
  pair.name2 = name2;
  pair.m1 = m1_amu * codata::atomic_mass_unit;
  pair.m2 = m2_amu * codata::atomic_mass_unit;
  pair.mu = pair.m2 / pair.m1;
  return pair;
}

TrapSpec make_trap_spec(const IonPair& pair, double omega1, double d, double T,
                        double lambda) {
  if (!(omega1 > 0.0))
    throw config_error("omega1 must be positive");
  if (!(d >= 0.0))
    throw config_error("transport distance d must be >= 0 (0 = static well)");
  if (!(T > 0.0))
    throw config_error("transport duration T must be positive");
  if (!(lambda > -0.99))
    throw config_error("lambda must exceed -0.99 (spring constant must stay "
                       "positive and well-conditioned)");
  TrapSpec trap;
  trap.omega1 = omega1;
  trap.d = d;
  trap.T = T;
  trap.lambda = lambda;
  trap.u0 = pair.m1 * omega1 * omega1;
  return trap;
}

ModeData normal_modes(const IonPair& pair, const TrapSpec& trap) {
  const double mu = pair.mu;

  // Frequencies: Omega_pm^2 = omega1^2 (1 + 1/mu +- root),
  // root = sqrt(1 - 1/mu + 1/mu^2). The minus branch is the slower mode.
  const double inv = 1.0 / mu;
  const double root = std::sqrt(1.0 - inv + inv * inv);

  ModeData m;
  m.Omega_plus = trap.omega1 * std::sqrt(1.0 + inv + root);
  m.Omega_minus = trap.omega1 * std::sqrt(1.0 + inv - root);

  // Mode vectors. With r_pm = 1 - 1/mu -+ root:
  //   a_pm = 1 / sqrt(1 + r_pm^2 mu),  b_pm = r_pm sqrt(mu) a_pm.
  // Equal masses give a = 1/sqrt2, b = -+ 1/sqrt2.
  const double r_plus = 1.0 - inv - root;
  const double r_minus = 1.0 - inv + root;
  m.a_plus = 1.0 / std::sqrt(1.0 + r_plus * r_plus * mu);
  m.a_minus = 1.0 / std::sqrt(1.0 + r_minus * r_minus * mu);
  m.b_plus = r_plus * std::sqrt(mu) * m.a_plus;
  m.b_minus = r_minus * std::sqrt(mu) * m.a_minus;

  const double opl = 1.0 + trap.lambda;
  m.Omega_plus_p = m.Omega_plus * std::sqrt(opl);
  m.Omega_minus_p = m.Omega_minus * std::sqrt(opl);

  m.l = 2.0 * std::cbrt(codata::coulomb_constant / (4.0 * trap.u0));
  m.l_p = m.l / std::cbrt(opl);

  const double sqrt_m1 = std::sqrt(pair.m1);
  const double sqrt_mu = std::sqrt(mu);
  m.c_plus = sqrt_m1 * (m.a_plus + m.b_plus * sqrt_mu);
  m.c_minus = sqrt_m1 * (m.a_minus + m.b_minus * sqrt_mu);

  return m;
}

std::pair<double, double> equilibrium_positions(const TrapSpec& trap,
                                                const ModeData& modes,
                                                double Q0) {
  (void)trap;
  return {Q0 + 0.5 * modes.l_p, Q0 - 0.5 * modes.l_p};
}

} // namespace iontransport
