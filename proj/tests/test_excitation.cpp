#include <doctest.h>

#include <cmath>
#include <numbers>

#include "iontransport/constants.hpp"
#include "iontransport/core_model.hpp"
#include "iontransport/errors.hpp"
#include "iontransport/excitation.hpp"
#include "iontransport/protocols.hpp"

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

Setup make_setup(double T_units = 10.5, double lambda = 0.0) {
  Setup s{make_ion_pair("Be9", "Mg24"), {}, {}};
  s.trap = make_trap_spec(s.pair, kOmega1, kD, T_units * kT0, lambda);
  s.modes = normal_modes(s.pair, s.trap);
  return s;
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

} // namespace

TEST_CASE("method names round trip") {
  CHECK(method_from_string("perturbative") == Method::perturbative);
  CHECK(method_from_string("oracle") == Method::displacement_oracle);
  CHECK(method_from_string("displacement_oracle") ==
        Method::displacement_oracle);
  CHECK(to_string(Method::perturbative) == "perturbative");
  CHECK(to_string(Method::displacement_oracle) == "oracle");
  CHECK_THROWS_AS((void)method_from_string("exact"), config_error);
}

TEST_CASE("zero spring error excites nothing") {
  const Setup s = make_setup();
  const Protocol cos5 = design_cosine(s.trap, s.modes);
  const Protocol p14 = design_poly14(s.trap, s.modes);
  const Protocol cm = design_cm_only(s.trap, s.pair);

  // integrand is identically zero at lambda = 0, so the result is exact
  for (const Protocol* p : {&cos5, &p14, &cm}) {
    const ExcitationReport r = excitation_perturbative(*p, s.modes, 0.0);
    CHECK(r.E_plus == 0.0);
    CHECK(r.E_minus == 0.0);
    CHECK(r.E_total == 0.0);
  }

  // the endpoint readout sees only quadrature noise for the engineered pair
  const double scale = codata::hbar * s.modes.Omega_minus;
  for (const Protocol* p : {&cos5, &p14}) {
    const ExcitationReport r = excitation_oracle(*p, s.modes, 0.0);
    CHECK(r.E_total >= 0.0);
    CHECK(r.E_total < 1e-9 * scale);
  }

  // the single-mode design misses both true modes: small but real residual
  const ExcitationReport rcm = excitation_oracle(cm, s.modes, 0.0);
  CHECK(rcm.E_total > 1e-33);
  CHECK(rcm.E_total < 1e-30);
}

TEST_CASE("perturbative energy matches the endpoint readout") {
  const Setup s = make_setup();
  const Protocol cos5 = design_cosine(s.trap, s.modes);
  const Protocol p14 = design_poly14(s.trap, s.modes);
  for (double lam : {-0.1, 0.05, 0.1}) {
    const ExcitationReport oc = excitation_oracle(cos5, s.modes, lam);
    const ExcitationReport pc = excitation_perturbative(cos5, s.modes, lam);
    CHECK(close(oc.E_total, pc.E_total, 1e-7));

    // the polynomial's endpoint rest holds only to its design residual,
    // which caps the attainable agreement well above quadrature noise
    const ExcitationReport op = excitation_oracle(p14, s.modes, lam);
    const ExcitationReport pp = excitation_perturbative(p14, s.modes, lam);
    CHECK(close(op.E_total, pp.E_total, 1e-4));
  }
}

TEST_CASE("report fields are internally consistent") {
  const Setup s = make_setup();
  const Protocol p = design_cosine(s.trap, s.modes);
  const double lam = 0.07;
  const ExcitationReport r = excitation_perturbative(p, s.modes, lam);
  CHECK(r.E_total == r.E_plus + r.E_minus);
  const double Om_p = s.modes.Omega_minus * std::sqrt(1.0 + lam);
  CHECK(close(r.E_total_hbarOmega_minus, r.E_total / (codata::hbar * Om_p),
              1e-15));
  CHECK(close(r.E_total_hbarOmega1, r.E_total / (codata::hbar * kOmega1),
              1e-15));
  CHECK(r.method == Method::perturbative);
  CHECK(r.lambda == lam);
  CHECK(r.protocol_kind == ProtocolKind::cosine);

  CHECK_THROWS_AS((void)excitation_perturbative(p, s.modes, -0.999),
                  config_error);
  CHECK_THROWS_AS((void)excitation_oracle(p, s.modes, -0.999), config_error);
}

TEST_CASE("quintic baseline goes through the oracle only") {
  const Setup s = make_setup();
  const Protocol nv = design_naive(s.trap);
  CHECK_THROWS_AS((void)excitation_perturbative(nv, s.modes, 0.05),
                  config_error);

  const Protocol p14 = design_poly14(s.trap, s.modes);
  const ExcitationReport rn = excitation_oracle(nv, s.modes, 0.05);
  const ExcitationReport rp = excitation_oracle(p14, s.modes, 0.05);
  CHECK(rn.E_total > 10.0 * rp.E_total);
  CHECK(rn.method == Method::displacement_oracle);
  CHECK(rn.protocol_kind == ProtocolKind::naive_quintic);
}

TEST_CASE("elimination integrals vanish for the engineered polynomial") {
  const Setup s = make_setup();
  const auto [pp, pm] = elimination_residuals(design_poly14(s.trap, s.modes),
                                              s.modes);
  const auto [np, nm] = elimination_residuals(design_naive(s.trap), s.modes);
  CHECK(pp.mode == Mode::plus);
  CHECK(pm.mode == Mode::minus);
  CHECK(std::hypot(pp.I_cos, pp.I_sin) <
        1e-6 * std::hypot(np.I_cos, np.I_sin));
  CHECK(std::hypot(pm.I_cos, pm.I_sin) <
        1e-6 * std::hypot(nm.I_cos, nm.I_sin));

  // denominators are a function of the trap alone, same for both rows
  CHECK(pp.D_plus == pm.D_plus);
  CHECK(pp.D_minus == pm.D_minus);
  CHECK(pp.D_plus == closed_form_denominator(s.modes.Omega_plus,
                                             s.modes.Omega_minus, s.trap.T));
}

TEST_CASE("closed form calibrates once and transfers across durations") {
  const Setup ref = make_setup(9.1);
  const ResidualClosedForm cal =
      calibrate_residual_closed_form(ref.pair, ref.trap);

  // the calibration recovers a single constant, equal for both modes
  const double K_expect =
      11025.0 * std::pow(std::numbers::pi, 8) / 2.0;
  CHECK(close(cal.K_plus, K_expect, 1e-6));
  CHECK(close(cal.K_minus, K_expect, 1e-6));

  for (double u : {10.9, 15.1}) {
    const Setup s = make_setup(u);
    const Protocol p = design_cosine(s.trap, s.modes);
    for (Mode mode : {Mode::plus, Mode::minus}) {
      const double quad = residual_combination(p, s.modes, mode);
      const double cf =
          residual_combination_closed_form(cal, s.trap, s.modes, mode);
      CHECK(close(cf, quad, 1e-5));
    }
  }
}

TEST_CASE("low-mode combination vanishes at the engineered durations") {
  const Setup base = make_setup(10.9);
  const double Om = base.modes.Omega_minus;
  const double pi = std::numbers::pi;

  const Protocol generic = design_cosine(base.trap, base.modes);
  const double typical =
      std::abs(residual_combination(generic, base.modes, Mode::minus));
  REQUIRE(typical > 0.0);

  // zeros of 1 + cos - sin: quarter and half turns past full cycles
  for (double phase : {14.0 * pi + 0.5 * pi, 14.0 * pi + pi}) {
    const double T = phase / Om;
    const IonPair pair = base.pair;
    const TrapSpec trap = make_trap_spec(pair, kOmega1, kD, T, 0.0);
    const ModeData modes = normal_modes(pair, trap);
    const Protocol p = design_cosine(trap, modes);
    const double combo = residual_combination(p, modes, Mode::minus);
    CHECK(std::abs(combo) < 1e-6 * typical);
  }
}
