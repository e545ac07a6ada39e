#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "iontransport/classical_sim.hpp"
#include "iontransport/constants.hpp"
#include "iontransport/core_model.hpp"
#include "iontransport/errors.hpp"
#include "iontransport/protocols.hpp"
#include "support/ode_oracle.hpp"

using namespace iontransport;

namespace {

constexpr double kOmega1 = 2.0 * std::numbers::pi * 2.0e6;
constexpr double kD = 370.0e-6;
constexpr double kT0 = 5.0e-7;

struct Setup {
  IonPair pair;
  TrapSpec trap;
  ModeData modes;
};

Setup make_setup(double T_units, double d = kD, double lambda = 0.0) {
  Setup s{make_ion_pair("Be9", "Mg24"), {}, {}};
  s.trap = make_trap_spec(s.pair, kOmega1, d, T_units * kT0, lambda);
  s.modes = normal_modes(s.pair, s.trap);
  return s;
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

double lab_energy(const std::array<double, 4>& y, const IonPair& pair,
                  double k, double Q0) {
  const double r = y[0] - y[1];
  return 0.5 * y[2] * y[2] / pair.m1 + 0.5 * y[3] * y[3] / pair.m2 +
         0.5 * k * ((y[0] - Q0) * (y[0] - Q0) + (y[1] - Q0) * (y[1] - Q0)) +
         codata::coulomb_constant / r;
}

} // namespace

TEST_CASE("a static well holds the ions at equilibrium") {
  const Setup s = make_setup(10.5, 0.0);
  const ClassicalRun run = simulate(design_naive(s.trap), s.pair, s.trap);
  const double E_eq = equilibrium_energy(s.pair, s.trap, 0.0);
  CHECK(std::abs(run.E_exc) < 1e-10 * E_eq);
  CHECK(run.steps > 0);
  CHECK(close(run.final_state.q1 - run.final_state.q2, s.modes.l_p, 1e-9));
  const double pscale = s.pair.m1 * kOmega1 * s.modes.l_p;
  CHECK(std::abs(run.final_state.p1) < 1e-9 * pscale);
  CHECK(std::abs(run.final_state.p2) < 1e-9 * pscale);
}

TEST_CASE("equilibrium energy is the rigid-configuration minimum") {
  const Setup s = make_setup(10.5);
  const double E0 = equilibrium_energy(s.pair, s.trap, 0.0);
  // independent of where the well sits
  CHECK(E0 == equilibrium_energy(s.pair, s.trap, kD));
  // equals the potential of two ions parked at +-l_p/2 around the center
  const double k = s.trap.u0 * (1.0 + s.trap.lambda);
  const double half = 0.5 * s.modes.l_p;
  const double direct = 0.5 * k * (half * half + half * half) +
                        codata::coulomb_constant / s.modes.l_p;
  CHECK(close(E0, direct, 1e-14));
  CHECK(close(E0, 1.5 * codata::coulomb_constant / s.modes.l_p, 1e-14));

  // a spring error shifts the equilibrium and its energy
  const Setup sp = make_setup(10.5, kD, 0.08);
  CHECK(!close(E0, equilibrium_energy(sp.pair, sp.trap, 0.0), 1e-3));
}

TEST_CASE("transport run agrees with an independent fixed-step integrator") {
  const Setup s = make_setup(7.0);
  const Protocol p = design_naive(s.trap);
  const ClassicalRun run = simulate(p, s.pair, s.trap);
  CHECK(run.steps > 100);

  const double k = s.trap.u0 * (1.0 + s.trap.lambda);
  const double T = s.trap.T;
  const auto rhs = [&](double t, const test_support::State<4>& y) {
    const double Q0 = evaluate(p, std::clamp(t, 0.0, T)).Q0;
    const double r = y[0] - y[1];
    const double fc = codata::coulomb_constant / (r * r);
    return test_support::State<4>{y[2] / s.pair.m1, y[3] / s.pair.m2,
                                  -k * (y[0] - Q0) + fc,
                                  -k * (y[1] - Q0) - fc};
  };
  const test_support::State<4> y0 = {0.5 * s.modes.l_p, -0.5 * s.modes.l_p,
                                     0.0, 0.0};
  const test_support::State<4> yT =
      test_support::rk4<4>(rhs, y0, 0.0, T, 1u << 19);

  CHECK(std::abs(run.final_state.q1 - yT[0]) < 1e-8 * s.modes.l_p);
  CHECK(std::abs(run.final_state.q2 - yT[1]) < 1e-8 * s.modes.l_p);
  const double pscale = s.pair.m1 * kOmega1 * s.modes.l_p;
  CHECK(std::abs(run.final_state.p1 - yT[2]) < 1e-8 * pscale);
  CHECK(std::abs(run.final_state.p2 - yT[3]) < 1e-8 * pscale);

  const double E_rk4 =
      lab_energy({yT[0], yT[1], yT[2], yT[3]}, s.pair, k, kD) -
      equilibrium_energy(s.pair, s.trap, kD);
  CHECK(std::abs(run.E_exc - E_rk4) < 1e-4 * std::abs(run.E_exc));

  // conservative dynamics after the move: drift stays at integrator noise
  const double E_eq = equilibrium_energy(s.pair, s.trap, kD);
  CHECK(run.energy_drift_estimate >= 0.0);
  CHECK(run.energy_drift_estimate < 1e-9 * E_eq);
}

TEST_CASE("runs are deterministic") {
  const Setup s = make_setup(6.0);
  const Protocol p = design_cosine(s.trap, s.modes);
  const ClassicalRun a = simulate(p, s.pair, s.trap);
  const ClassicalRun b = simulate(p, s.pair, s.trap);
  CHECK(a.E_exc == b.E_exc);
  CHECK(a.steps == b.steps);
  CHECK(a.final_state.q1 == b.final_state.q1);
  CHECK(a.final_state.p2 == b.final_state.p2);
}

TEST_CASE("excitation decays as the move slows down") {
  const Setup fast = make_setup(7.0);
  const Setup slow = make_setup(12.0);
  const double E_fast =
      simulate(design_cosine(fast.trap, fast.modes), fast.pair, fast.trap)
          .E_exc;
  const double E_slow =
      simulate(design_cosine(slow.trap, slow.modes), slow.pair, slow.trap)
          .E_exc;
  CHECK(E_fast > 0.0);
  CHECK(E_slow > -1e-12 * equilibrium_energy(slow.pair, slow.trap, 0.0));
  CHECK(std::abs(E_slow) < 1e-3 * E_fast);
}

TEST_CASE("breakdown scan walks the grid in order") {
  const Setup s = make_setup(10.5);
  const std::vector<ProtocolKind> kinds{ProtocolKind::cosine,
                                        ProtocolKind::naive_quintic};
  const std::vector<double> grid{7.0 * kT0, 9.0 * kT0, 11.0 * kT0};
  const auto rows = harmonic_breakdown_scan(kinds, s.pair, s.trap, grid, 2);
  REQUIRE(rows.size() == 6);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BreakdownRow& r = rows[i];
    CHECK(close(r.T_over_T0, grid[i / 2] / kT0, 1e-12));
    CHECK(r.protocol == kinds[i % 2]);
    CHECK(r.ok);
    CHECK(std::isfinite(r.E_exc_J));
    CHECK(close(r.E_exc_hbarOmega1, r.E_exc_J / (codata::hbar * kOmega1),
                1e-15));
    CHECK(r.steps > 0);
    CHECK(r.drift >= 0.0);
    CHECK(r.drift < 1e-8);
  }

  CHECK_THROWS_AS((void)harmonic_breakdown_scan(
                      kinds, s.pair, s.trap, {9.0 * kT0, 9.0 * kT0}, 1),
                  config_error);
}

TEST_CASE("scan records a failed point and moves on") {
  const Setup s = make_setup(10.5);
  // first harmonic resonant with the single assumed mode: design must fail
  const double T_res = std::numbers::pi / cm_frequency(s.trap, s.pair);
  const std::vector<double> grid{T_res, 10.5 * kT0};
  const auto rows = harmonic_breakdown_scan({ProtocolKind::cm_only}, s.pair,
                                            s.trap, grid, 1);
  REQUIRE(rows.size() == 2);
  CHECK(!rows[0].ok);
  CHECK(std::isnan(rows[0].E_exc_J));
  CHECK(rows[1].ok);
  CHECK(std::isfinite(rows[1].E_exc_J));
}
