#include "iontransport/excitation.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "iontransport/constants.hpp"
#include "iontransport/detail/quadrature.hpp"
#include "iontransport/errors.hpp"

namespace iontransport {

namespace {

constexpr double pi = std::numbers::pi;

ExcitationReport assemble_report(double E_plus, double E_minus, Method method,
                                 double lambda, const Protocol& p,
                                 const ModeData& modes) {
  ExcitationReport r;
  r.E_plus = E_plus;
  r.E_minus = E_minus;
  r.E_total = E_plus + E_minus;
  const double Om_p = modes.Omega_minus * std::sqrt(1.0 + lambda);
  r.E_total_hbarOmega_minus = r.E_total / (codata::hbar * Om_p);
  r.E_total_hbarOmega1 = r.E_total / (codata::hbar * p.trap.omega1);
  r.method = method;
  r.lambda = lambda;
  r.protocol_kind = p.kind;
  return r;
}

// One mode of the perturbative formula. alpha'' comes from the Newton
// identity -W^2 (alpha - q0), not from differencing.
double perturbative_mode_energy(const ModeForcing& f) {
  const ModeTrajectory a = alpha(f.protocol, f);
  const double W = f.Omega;
  const double Wp = f.Omega_p;
  const double lam = f.lambda;
  const std::size_t n = a.value.size();
  std::vector<double> gc(n), gs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double q0 = f.q0(a.t[i]);
    const double addot = -W * W * (a.value[i] - q0);
    const double B = q0 * lam / (1.0 + lam);
    const double G = lam * addot - B * Wp * Wp;
    gc[i] = G * std::cos(Wp * a.t[i]);
    gs[i] = G * std::sin(Wp * a.t[i]);
  }
  const double Ic = detail::simpson(gc, a.dt);
  const double Is = detail::simpson(gs, a.dt);
  return 0.5 * (Ic * Ic + Is * Is);
}

} // namespace

std::string to_string(Method m) {
  return m == Method::perturbative ? "perturbative" : "oracle";
}

Method method_from_string(const std::string& name) {
  if (name == "perturbative") return Method::perturbative;
  if (name == "oracle" || name == "displacement_oracle")
    return Method::displacement_oracle;
  throw config_error("unknown method '" + name +
                     "' (choose perturbative|oracle)");
}

ExcitationReport excitation_perturbative(const Protocol& p,
                                         const ModeData& modes,
                                         double lambda) {
  if (p.kind == ProtocolKind::naive_quintic)
    throw config_error(
        "perturbative excitation requires a protocol whose unperturbed "
        "response ends at rest; use the displacement oracle for the naive "
        "baseline");
  if (!(lambda > -0.99)) throw config_error("lambda must exceed -0.99");
  auto [fp, fm] = forcing(p, modes, lambda);
  const double E_plus = perturbative_mode_energy(fp);
  const double E_minus = perturbative_mode_energy(fm);
  return assemble_report(E_plus, E_minus, Method::perturbative, lambda, p,
                         modes);
}

ExcitationReport excitation_oracle(const Protocol& p, const ModeData& modes,
                                   double lambda) {
  if (!(lambda > -0.99)) throw config_error("lambda must exceed -0.99");
  auto [fp, fm] = forcing(p, modes, lambda);
  double E[2];
  const ModeForcing* fs[2] = {&fp, &fm};
  for (int k = 0; k < 2; ++k) {
    const ModeTrajectory F = perturbed_trajectory(p, *fs[k], lambda);
    const double FT = F.value.back();
    const double FdT = F.deriv.back();
    const double Wp = fs[k]->Omega_p;
    E[k] = 0.5 * FdT * FdT + 0.5 * Wp * Wp * FT * FT;
  }
  return assemble_report(E[0], E[1], Method::displacement_oracle, lambda, p,
                         modes);
}

std::pair<ResidualIntegrals, ResidualIntegrals>
elimination_residuals(const Protocol& p, const ModeData& modes) {
  auto [fp, fm] = forcing(p, modes, 0.0);
  const double T = p.trap.T;
  const double Dp =
      closed_form_denominator(modes.Omega_plus, modes.Omega_minus, T);
  const double Dm =
      closed_form_denominator(modes.Omega_minus, modes.Omega_plus, T);
  ResidualIntegrals out[2];
  const ModeForcing* fs[2] = {&fp, &fm};
  for (int k = 0; k < 2; ++k) {
    const ModeTrajectory a = alpha(p, *fs[k]);
    const double W = fs[k]->Omega;
    const std::size_t n = a.value.size();
    std::vector<double> gc(n), gs(n);
    for (std::size_t i = 0; i < n; ++i) {
      gc[i] = a.value[i] * std::cos(W * a.t[i]);
      gs[i] = a.value[i] * std::sin(W * a.t[i]);
    }
    out[k].mode = fs[k]->mode;
    out[k].I_cos = detail::simpson(gc, a.dt);
    out[k].I_sin = detail::simpson(gs, a.dt);
    out[k].D_plus = Dp;
    out[k].D_minus = Dm;
  }
  return {out[0], out[1]};
}

double residual_combination(const Protocol& p, const ModeData& modes,
                            Mode mode) {
  auto [rp, rm] = elimination_residuals(p, modes);
  const ResidualIntegrals& r = (mode == Mode::plus) ? rp : rm;
  const double W = (mode == Mode::plus) ? modes.Omega_plus : modes.Omega_minus;
  return W * W * (r.I_cos + r.I_sin);
}

double closed_form_denominator(double Omega_self, double Omega_other,
                               double T) {
  const double x = (Omega_self * T) * (Omega_self * T);
  const double p2 = pi * pi;
  const double p4 = p2 * p2;
  const double p6 = p4 * p2;
  const double p8 = p4 * p4;
  const double poly =
      ((((x - 84.0 * p2) * x + 1974.0 * p4) * x - 12916.0 * p6) * x) +
      11025.0 * p8;
  return poly * Omega_other * Omega_other;
}

double residual_combination_shape(const TrapSpec& trap, const ModeData& modes,
                                  Mode mode) {
  const double W =
      (mode == Mode::plus) ? modes.Omega_plus : modes.Omega_minus;
  const double Wo =
      (mode == Mode::plus) ? modes.Omega_minus : modes.Omega_plus;
  const double c = (mode == Mode::plus) ? modes.c_plus : modes.c_minus;
  const double D = closed_form_denominator(W, Wo, trap.T);
  const double osc = 1.0 + std::cos(W * trap.T) - std::sin(W * trap.T);
  return trap.d * c * W * (Wo * Wo - W * W) * osc / D;
}

ResidualClosedForm calibrate_residual_closed_form(const IonPair& pair,
                                                  const TrapSpec& reference) {
  const ModeData modes = normal_modes(pair, reference);
  const Protocol proto = design_cosine(reference, modes);
  ResidualClosedForm cal;
  for (Mode mode : {Mode::plus, Mode::minus}) {
    const double shape = residual_combination_shape(reference, modes, mode);
    const double quad = residual_combination(proto, modes, mode);
    if (!(std::abs(shape) > 0.0))
      throw numerics_error(
          "closed-form calibration reference T sits on a zero of the shape; "
          "pick another reference",
          0.0);
    const double K = quad / shape;
    if (mode == Mode::plus)
      cal.K_plus = K;
    else
      cal.K_minus = K;
  }
  return cal;
}

double residual_combination_closed_form(const ResidualClosedForm& cal,
                                        const TrapSpec& trap,
                                        const ModeData& modes, Mode mode) {
  const double K = (mode == Mode::plus) ? cal.K_plus : cal.K_minus;
  return K * residual_combination_shape(trap, modes, mode);
}

} // namespace iontransport
