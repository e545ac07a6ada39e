#include "iontransport/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <sstream>

#include "iontransport/constants.hpp"
#include "iontransport/errors.hpp"
#include "iontransport/mode_dynamics.hpp"

namespace iontransport {

namespace {

constexpr const char* kVersion = "iontransport 1.0.0";
constexpr const char* kQuadratureNote =
    "cumulative simpson, compensated sums, grid doubling 2048..2^20, rtol 1e-9";
constexpr const char* kIntegratorNote =
    "dopri5(4), rtol 1e-11, atol 1e-11*l / 1e-11*m1*omega1*l";

Protocol build_protocol(ProtocolKind kind, const TrapSpec& trap,
                        const ModeData& modes, const IonPair& pair) {
  switch (kind) {
    case ProtocolKind::cosine: return design_cosine(trap, modes);
    case ProtocolKind::poly14: return design_poly14(trap, modes);
    case ProtocolKind::naive_quintic: return design_naive(trap);
    case ProtocolKind::cm_only: return design_cm_only(trap, pair);
  }
  throw config_error("unhandled protocol kind");
}

ExcitationReport excite(const Protocol& p, const ModeData& modes,
                        double lambda, Method method) {
  return method == Method::perturbative
             ? excitation_perturbative(p, modes, lambda)
             : excitation_oracle(p, modes, lambda);
}

std::string join_protocols(const std::vector<ProtocolKind>& kinds) {
  std::string s;
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    if (i) s += " ";
    s += to_string(kinds[i]);
  }
  return s;
}

std::vector<std::pair<std::string, std::string>> common_metadata(
    const ExperimentSpec& spec) {
  const double T0 = base_period(spec.trap);
  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("experiment", to_string(spec.figure));
  md.emplace_back("version", kVersion);
  md.emplace_back("ion1", spec.pair.name1);
  md.emplace_back("ion2", spec.pair.name2);
  md.emplace_back("mass1_amu",
                  format_value(spec.pair.m1 / codata::atomic_mass_unit));
  md.emplace_back("mass2_amu",
                  format_value(spec.pair.m2 / codata::atomic_mass_unit));
  md.emplace_back("omega1_rad_per_s", format_value(spec.trap.omega1));
  md.emplace_back("d_m", format_value(spec.trap.d));
  md.emplace_back("T_over_T0", format_value(spec.trap.T / T0));
  md.emplace_back("lambda", format_value(spec.trap.lambda));
  if (!spec.T_list.empty()) {
    std::string ts;
    for (std::size_t i = 0; i < spec.T_list.size(); ++i) {
      if (i) ts += " ";
      ts += format_value(spec.T_list[i] / T0);
    }
    md.emplace_back("T_list_over_T0", ts);
  }
  md.emplace_back("protocols", join_protocols(spec.protocols));
  md.emplace_back("method", to_string(spec.method));
  md.emplace_back("axis_min", format_value(spec.axis_min));
  md.emplace_back("axis_max", format_value(spec.axis_max));
  md.emplace_back("axis_steps", std::to_string(spec.axis_steps));
  md.emplace_back("quadrature", kQuadratureNote);
  md.emplace_back("integrator", kIntegratorNote);
  return md;
}

ExperimentResult run_fig1(const ExperimentSpec& spec) {
  ExperimentResult r;
  r.columns = {"T_over_T0", "protocol", "t", "Q0", "Q0dot", "Q0ddot"};
  r.metadata = common_metadata(spec);
  const double T0 = base_period(spec.trap);
  const int samples = spec.axis_steps > 1 ? spec.axis_steps : 1001;
  for (double T : spec.T_list) {
    const TrapSpec trap = make_trap_spec(spec.pair, spec.trap.omega1,
                                         spec.trap.d, T, spec.trap.lambda);
    const ModeData modes = normal_modes(spec.pair, trap);
    for (ProtocolKind kind : spec.protocols) {
      const Protocol proto = build_protocol(kind, trap, modes, spec.pair);
      for (int i = 0; i < samples; ++i) {
        const double t =
            (i == samples - 1) ? T : T * static_cast<double>(i) / (samples - 1);
        const TrajectoryPoint pt = evaluate(proto, t);
        r.rows.push_back({format_value(T / T0), to_string(kind),
                          format_value(t), format_value(pt.Q0),
                          format_value(pt.Q0dot), format_value(pt.Q0ddot)});
      }
    }
  }
  return r;
}

ExperimentResult run_lambda_sweep(const ExperimentSpec& spec) {
  ExperimentResult r;
  r.columns = {"lambda",    "protocol",
               "E_plus_J",  "E_minus_J",
               "E_total_J", "E_total_hbarOmega_minus",
               "method"};
  r.metadata = common_metadata(spec);
  const ModeData modes = normal_modes(spec.pair, spec.trap);
  const std::vector<double> grid =
      uniform_grid(spec.axis_min, spec.axis_max, spec.axis_steps);
  for (ProtocolKind kind : spec.protocols) {
    const Protocol proto = build_protocol(kind, spec.trap, modes, spec.pair);
    for (double lam : grid) {
      try {
        const ExcitationReport rep = excite(proto, modes, lam, spec.method);
        r.rows.push_back({format_value(lam), to_string(kind),
                          format_value(rep.E_plus), format_value(rep.E_minus),
                          format_value(rep.E_total),
                          format_value(rep.E_total_hbarOmega_minus),
                          to_string(rep.method)});
      } catch (const config_error& e) {
        throw config_error("at lambda=" + format_value(lam) + ", protocol=" +
                           to_string(kind) + ": " + e.what());
      } catch (const error& e) {
        throw numerics_error("at lambda=" + format_value(lam) + ", protocol=" +
                                 to_string(kind) + ": " + e.what(),
                             0.0);
      }
    }
  }
  return r;
}

ExperimentResult run_fig3(const ExperimentSpec& spec) {
  ExperimentResult r;
  r.columns = {"t", "alpha_plus", "alpha_minus", "sin_Omega_plus_t",
               "sin_Omega_minus_t"};
  r.metadata = common_metadata(spec);
  const ModeData modes = normal_modes(spec.pair, spec.trap);
  const ProtocolKind kind =
      spec.protocols.empty() ? ProtocolKind::cosine : spec.protocols[0];
  const Protocol proto = build_protocol(kind, spec.trap, modes, spec.pair);
  auto [fp, fm] = forcing(proto, modes, 0.0);
  const ModeTrajectory ap = alpha(proto, fp);
  const ModeTrajectory am = alpha(proto, fm);

  const std::size_t N = std::min(ap.grid_size, am.grid_size);
  const std::size_t sp = ap.grid_size / N;
  const std::size_t sm = am.grid_size / N;
  const int target = spec.axis_steps > 1 ? spec.axis_steps - 1 : 1024;
  const std::size_t stride =
      std::max<std::size_t>(1, N / static_cast<std::size_t>(target));

  double norm_p = 0.0, norm_m = 0.0;
  for (double v : ap.value) norm_p = std::max(norm_p, std::abs(v));
  for (double v : am.value) norm_m = std::max(norm_m, std::abs(v));
  if (norm_p == 0.0) norm_p = 1.0;
  if (norm_m == 0.0) norm_m = 1.0;

  for (std::size_t i = 0; i <= N; i += stride) {
    const double t = ap.t[i * sp];
    r.rows.push_back({format_value(t),
                      format_value(ap.value[i * sp] / norm_p),
                      format_value(am.value[i * sm] / norm_m),
                      format_value(std::sin(modes.Omega_plus * t)),
                      format_value(std::sin(modes.Omega_minus * t))});
  }
  return r;
}

ExperimentResult run_fig4(const ExperimentSpec& spec) {
  ExperimentResult r;
  r.columns = {"T_over_T0", "protocol", "E_exc_J", "E_exc_hbarOmega1",
               "steps",     "drift"};
  r.metadata = common_metadata(spec);
  const double T0 = base_period(spec.trap);
  const std::vector<double> ratios =
      uniform_grid(spec.axis_min, spec.axis_max, spec.axis_steps);
  std::vector<double> T_grid(ratios.size());
  for (std::size_t i = 0; i < ratios.size(); ++i) T_grid[i] = ratios[i] * T0;
  const std::vector<BreakdownRow> scan = harmonic_breakdown_scan(
      spec.protocols, spec.pair, spec.trap, T_grid, spec.threads);
  for (const BreakdownRow& row : scan) {
    r.rows.push_back({format_value(row.T_over_T0), to_string(row.protocol),
                      format_value(row.E_exc_J),
                      format_value(row.E_exc_hbarOmega1),
                      std::to_string(row.steps), format_value(row.drift)});
  }
  return r;
}

} // namespace

std::string to_string(Figure f) {
  switch (f) {
    case Figure::fig1: return "fig1";
    case Figure::fig2: return "fig2";
    case Figure::fig3: return "fig3";
    case Figure::fig4: return "fig4";
    case Figure::fig5: return "fig5";
    case Figure::scaling_law: return "scaling_law";
  }
  return "?";
}

Figure figure_from_string(const std::string& name) {
  if (name == "fig1") return Figure::fig1;
  if (name == "fig2") return Figure::fig2;
  if (name == "fig3") return Figure::fig3;
  if (name == "fig4") return Figure::fig4;
  if (name == "fig5") return Figure::fig5;
  if (name == "scaling_law" || name == "scaling-law")
    return Figure::scaling_law;
  throw config_error("unknown figure '" + name +
                     "' (choose fig1|fig2|fig3|fig4|fig5|scaling_law)");
}

Preset preset(const std::string& name) {
  if (name == "paper2014")
    return Preset{"paper2014", "Be9", "Mg24", 2.0e6, 370.0e-6};
  throw config_error("unknown preset '" + name + "' (available: paper2014)");
}

ExperimentSpec default_spec(Figure figure, const Preset& ps) {
  ExperimentSpec spec;
  spec.figure = figure;
  spec.pair = make_ion_pair(ps.ion1, ps.ion2);
  const double omega1 = 2.0 * std::numbers::pi * ps.omega1_linear_Hz;
  const double T0 = 1.0 / ps.omega1_linear_Hz;
  spec.trap = make_trap_spec(spec.pair, omega1, ps.d, 10.5 * T0, 0.0);
  spec.threads = 1;
  switch (figure) {
    case Figure::fig1:
      spec.protocols = {ProtocolKind::cosine, ProtocolKind::poly14};
      spec.T_list = {7.5 * T0, 10.5 * T0};
      spec.axis_steps = 1001;
      break;
    case Figure::fig2:
      spec.protocols = {ProtocolKind::cosine, ProtocolKind::poly14};
      spec.axis_min = -0.1;
      spec.axis_max = 0.1;
      spec.axis_steps = 201;
      spec.method = Method::perturbative;
      break;
    case Figure::fig3:
      spec.protocols = {ProtocolKind::cosine};
      spec.axis_steps = 1025;
      break;
    case Figure::fig4:
      spec.protocols = {ProtocolKind::cosine, ProtocolKind::poly14};
      spec.axis_min = 5.0;
      spec.axis_max = 14.0;
      spec.axis_steps = 37;
      break;
    case Figure::fig5:
      spec.protocols = {ProtocolKind::cosine, ProtocolKind::cm_only};
      spec.axis_min = -0.1;
      spec.axis_max = 0.1;
      spec.axis_steps = 201;
      spec.method = Method::displacement_oracle;
      break;
    case Figure::scaling_law:
      spec.protocols = {ProtocolKind::poly14, ProtocolKind::naive_quintic,
                        ProtocolKind::cosine};
      spec.axis_min = 1e-3;
      spec.axis_max = 1e-1;
      spec.axis_steps = 21;
      spec.method = Method::displacement_oracle;
      break;
  }
  return spec;
}

std::vector<ScalingFit> scaling_law(const ExperimentSpec& spec) {
  if (!(spec.axis_min > 0.0) || !(spec.axis_max > spec.axis_min))
    throw config_error("scaling_law needs a positive, increasing lambda range");
  const ModeData modes = normal_modes(spec.pair, spec.trap);
  const int n = spec.axis_steps;
  std::vector<double> lambdas(static_cast<std::size_t>(n));
  const double lx0 = std::log10(spec.axis_min);
  const double lx1 = std::log10(spec.axis_max);
  for (int i = 0; i < n; ++i) {
    const double f = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
    lambdas[static_cast<std::size_t>(i)] =
        std::pow(10.0, lx0 + f * (lx1 - lx0));
  }

  std::vector<ScalingFit> fits;
  for (ProtocolKind kind : spec.protocols) {
    const Protocol proto = build_protocol(kind, spec.trap, modes, spec.pair);
    const double E0 = excitation_oracle(proto, modes, 0.0).E_total;
    std::vector<double> xs, ys;
    for (double lam : lambdas) {
      const double E = excitation_oracle(proto, modes, lam).E_total;
      const double excess = std::abs(E - E0);
      if (excess > 0.0) {
        xs.push_back(std::log10(lam));
        ys.push_back(std::log10(excess));
      }
    }
    ScalingFit fit;
    fit.protocol = kind;
    fit.points = static_cast<int>(xs.size());
    if (xs.size() < 2) {
      fit.slope = std::numeric_limits<double>::quiet_NaN();
      fit.intercept = fit.slope;
    } else {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= xs.size();
      my /= ys.size();
      double sxx = 0.0, sxy = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
      }
      fit.slope = sxy / sxx;
      fit.intercept = my - fit.slope * mx;
    }
    fits.push_back(fit);
  }
  return fits;
}

ExperimentResult run(const ExperimentSpec& spec) {
  switch (spec.figure) {
    case Figure::fig1: return run_fig1(spec);
    case Figure::fig2: return run_lambda_sweep(spec);
    case Figure::fig3: return run_fig3(spec);
    case Figure::fig4: return run_fig4(spec);
    case Figure::fig5: return run_lambda_sweep(spec);
    case Figure::scaling_law: {
      ExperimentResult r;
      r.columns = {"protocol", "slope", "intercept", "points", "lambda_min",
                   "lambda_max"};
      r.metadata = common_metadata(spec);
      for (const ScalingFit& fit : scaling_law(spec)) {
        r.rows.push_back({to_string(fit.protocol), format_value(fit.slope),
                          format_value(fit.intercept),
                          std::to_string(fit.points),
                          format_value(spec.axis_min),
                          format_value(spec.axis_max)});
      }
      return r;
    }
  }
  throw config_error("unhandled figure");
}

std::string format_value(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  std::vector<double> g(static_cast<std::size_t>(n > 0 ? n : 0));
  if (n <= 0) return g;
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  const double den = static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    if (i == 0)
      g[static_cast<std::size_t>(i)] = lo;
    else if (i == n - 1)
      g[static_cast<std::size_t>(i)] = hi;
    else
      g[static_cast<std::size_t>(i)] =
          ((den - i) * lo + static_cast<double>(i) * hi) / den;
  }
  return g;
}

std::string to_csv(const ExperimentResult& r) {
  std::ostringstream out;
  for (const auto& [k, v] : r.metadata) out << "# " << k << " = " << v << "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    out << (i ? "," : "") << r.columns[i];
  out << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

namespace {

bool cell_is_numeric(const std::string& s, std::string& token) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  if (!std::isfinite(v)) {
    token = "null";
    return true;
  }
  token = s;
  return true;
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

} // namespace

std::string to_json(const ExperimentResult& r) {
  std::ostringstream out;
  out << "{\"metadata\":{";
  for (std::size_t i = 0; i < r.metadata.size(); ++i) {
    out << (i ? "," : "") << '"' << json_escape(r.metadata[i].first)
        << "\":\"" << json_escape(r.metadata[i].second) << '"';
  }
  out << "},\"columns\":[";
  for (std::size_t i = 0; i < r.columns.size(); ++i)
    out << (i ? "," : "") << '"' << json_escape(r.columns[i]) << '"';
  out << "]}\n";
  for (const auto& row : r.rows) {
    out << '{';
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i ? "," : "") << '"' << json_escape(r.columns[i]) << "\":";
      std::string token;
      if (cell_is_numeric(row[i], token))
        out << token;
      else
        out << '"' << json_escape(row[i]) << '"';
    }
    out << "}\n";
  }
  return out.str();
}

} // namespace iontransport
