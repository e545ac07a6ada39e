#include "iontransport/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "iontransport/classical_sim.hpp"
#include "iontransport/constants.hpp"
#include "iontransport/core_model.hpp"
#include "iontransport/errors.hpp"
#include "iontransport/excitation.hpp"
#include "iontransport/experiments.hpp"
#include "iontransport/mode_dynamics.hpp"
#include "iontransport/protocols.hpp"

namespace iontransport {
namespace {

struct Options {
  std::string preset_name = "paper2014";
  std::string ions = "Be9,Mg24";
  double mass1 = 0.0; // amu, 0 = species table
  double mass2 = 0.0;
  double omega1 = 2.0e6; // linear Hz
  double d = 370.0e-6;   // m
  double T = 10.5;       // units of T0
  double lambda = 0.0;
  double lambda_min = -0.1, lambda_max = 0.1;
  int lambda_steps = 201;
  double T_min = 5.0, T_max = 14.0; // units of T0
  int T_steps = 37;
  std::string protocol = "cosine";
  std::string method = "auto";
  int samples = 0; // 0 = per-command default
  int threads = 0; // 0 = machine parallelism
  std::string format = "csv";
  std::string out_path;
  std::string config_path;
  std::string dump_path;
  std::string figure_name;

  std::set<std::string> cfg_keys; // keys supplied by --config
  CLI::App* sub = nullptr;        // parsed subcommand

  bool provided(const std::string& key) const;
};

bool cli_given(const CLI::App* sub, const std::string& name) {
  if (!sub) return false;
  try {
    return sub->count(name) > 0;
  } catch (const CLI::Error&) {
    return false;
  }
}

bool Options::provided(const std::string& key) const {
  if (cfg_keys.count(key)) return true;
  return cli_given(sub, key == "figure" ? "figure" : "--" + key);
}

void add_common_options(CLI::App* sub, Options& o) {
  sub->add_option("--preset", o.preset_name,
                  "named parameter set (paper2014: Be9,Mg24, omega1 2e6 Hz, "
                  "d 370e-6 m)");
  sub->add_option("--ions", o.ions,
                  "two species from the isotope table, comma separated");
  sub->add_option("--mass1", o.mass1, "mass of ion 1 in amu, overrides table");
  sub->add_option("--mass2", o.mass2, "mass of ion 2 in amu, overrides table");
  sub->add_option("--omega1", o.omega1,
                  "trap frequency of ion 1 in Hz (linear; angular = 2 pi x)");
  sub->add_option("--d", o.d, "transport distance in m");
  sub->add_option("--T", o.T,
                  "transport duration in units of T0 = 2 pi / omega1");
  sub->add_option("--lambda", o.lambda, "relative spring-constant error");
  sub->add_option("--lambda-min", o.lambda_min, "lambda sweep start");
  sub->add_option("--lambda-max", o.lambda_max, "lambda sweep end");
  sub->add_option("--lambda-steps", o.lambda_steps, "lambda sweep points");
  sub->add_option("--T-min", o.T_min, "duration sweep start, units of T0");
  sub->add_option("--T-max", o.T_max, "duration sweep end, units of T0");
  sub->add_option("--T-steps", o.T_steps, "duration sweep points");
  sub->add_option("--protocol", o.protocol, "cosine|poly14|naive|cm-only");
  sub->add_option("--method", o.method,
                  "perturbative|oracle (default: perturbative where valid, "
                  "oracle for naive)");
  sub->add_option("--samples", o.samples, "trajectory sample count");
  sub->add_option("--threads", o.threads,
                  "worker threads for grid scans (0 = machine parallelism)");
  sub->add_option("--format", o.format, "csv|json");
  sub->add_option("--out", o.out_path, "output file (default: stdout)");
  sub->add_option("--config", o.config_path,
                  "JSON config file; explicit flags override its values");
  sub->add_option("--dump-config", o.dump_path,
                  "write the fully resolved configuration here, then run");
}

void apply_config_file(Options& o, const std::string& cmd) {
  std::ifstream f(o.config_path);
  if (!f)
    throw config_error("cannot open --config file '" + o.config_path + "'");
  nlohmann::json doc;
  try {
    f >> doc;
  } catch (const std::exception& e) {
    throw config_error("config file '" + o.config_path +
                       "': " + std::string(e.what()));
  }
  if (!doc.is_object())
    throw config_error("config file must hold a single JSON object");

  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const nlohmann::json& v = it.value();
    auto num = [&]() -> double {
      if (!v.is_number())
        throw config_error("config key '" + key + "' must be a number");
      return v.get<double>();
    };
    auto integer = [&]() -> int {
      if (!v.is_number_integer())
        throw config_error("config key '" + key + "' must be an integer");
      return v.get<int>();
    };
    auto str = [&]() -> std::string {
      if (!v.is_string())
        throw config_error("config key '" + key + "' must be a string");
      return v.get<std::string>();
    };

    if (key == "subcommand") {
      if (str() != cmd)
        throw config_error("config file is for subcommand '" +
                           v.get<std::string>() + "', but '" + cmd +
                           "' was invoked");
      continue;
    }
    const bool given = cli_given(o.sub, key == "figure" ? "figure" : "--" + key);
    if (key == "figure") {
      if (!given) o.figure_name = str();
    } else if (key == "preset") {
      if (!given) o.preset_name = str();
    } else if (key == "ions") {
      if (!given) o.ions = str();
    } else if (key == "mass1") {
      if (!given) o.mass1 = num();
    } else if (key == "mass2") {
      if (!given) o.mass2 = num();
    } else if (key == "omega1") {
      if (!given) o.omega1 = num();
    } else if (key == "d") {
      if (!given) o.d = num();
    } else if (key == "T") {
      if (!given) o.T = num();
    } else if (key == "lambda") {
      if (!given) o.lambda = num();
    } else if (key == "lambda-min") {
      if (!given) o.lambda_min = num();
    } else if (key == "lambda-max") {
      if (!given) o.lambda_max = num();
    } else if (key == "lambda-steps") {
      if (!given) o.lambda_steps = integer();
    } else if (key == "T-min") {
      if (!given) o.T_min = num();
    } else if (key == "T-max") {
      if (!given) o.T_max = num();
    } else if (key == "T-steps") {
      if (!given) o.T_steps = integer();
    } else if (key == "protocol") {
      if (!given) o.protocol = str();
    } else if (key == "method") {
      if (!given) o.method = str();
    } else if (key == "samples") {
      if (!given) o.samples = integer();
    } else if (key == "threads") {
      if (!given) o.threads = integer();
    } else if (key == "format") {
      if (!given) o.format = str();
    } else if (key == "out") {
      if (!given) o.out_path = str();
    } else {
      throw config_error("unknown config key '" + key + "'");
    }
    o.cfg_keys.insert(key);
  }
}

void apply_preset(Options& o) {
  const Preset ps = preset(o.preset_name); // validates the name
  if (!o.provided("ions")) o.ions = ps.ion1 + "," + ps.ion2;
  if (!o.provided("omega1")) o.omega1 = ps.omega1_linear_Hz;
  if (!o.provided("d")) o.d = ps.d;
}

double species_mass_amu(const std::string& name) {
  return make_ion_pair(name, name).m1 / codata::atomic_mass_unit;
}

IonPair resolve_pair(const Options& o) {
  const auto comma = o.ions.find(',');
  if (comma == std::string::npos || comma == 0 || comma + 1 >= o.ions.size())
    throw config_error(
        "--ions expects two comma-separated species names, e.g. Be9,Mg24");
  const std::string n1 = o.ions.substr(0, comma);
  const std::string n2 = o.ions.substr(comma + 1);
  const double m1 = o.mass1 > 0.0 ? o.mass1 : species_mass_amu(n1);
  const double m2 = o.mass2 > 0.0 ? o.mass2 : species_mass_amu(n2);
  return make_ion_pair_masses(n1, n2, m1, m2);
}

// --T and friends are in units of T0 = 2 pi / omega1 = 1 / (linear omega1).
TrapSpec resolve_trap(const Options& o, const IonPair& pair, double T_units) {
  if (!(o.omega1 > 0.0))
    throw config_error("--omega1 must be positive (linear Hz)");
  const double w = 2.0 * std::numbers::pi * o.omega1;
  return make_trap_spec(pair, w, o.d, T_units / o.omega1, o.lambda);
}

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

Method resolve_method(const Options& o, ProtocolKind kind) {
  if (o.method == "auto")
    return kind == ProtocolKind::naive_quintic ? Method::displacement_oracle
                                               : Method::perturbative;
  return method_from_string(o.method);
}

ExcitationReport run_excitation(const Protocol& p, const ModeData& modes,
                                double lambda, Method m) {
  return m == Method::perturbative ? excitation_perturbative(p, modes, lambda)
                                   : excitation_oracle(p, modes, lambda);
}

unsigned resolve_threads(const Options& o) {
  if (o.threads < 0) throw config_error("--threads must be >= 0");
  if (o.threads > 0) return static_cast<unsigned>(o.threads);
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? hc : 1;
}

std::vector<std::pair<std::string, std::string>> cli_metadata(
    const std::string& cmd, const Options& o, const IonPair& pair,
    const TrapSpec& trap) {
  std::vector<std::pair<std::string, std::string>> md;
  md.emplace_back("command", cmd);
  md.emplace_back("version", "iontransport 1.0.0");
  md.emplace_back("ion1", pair.name1);
  md.emplace_back("ion2", pair.name2);
  md.emplace_back("mass1_amu",
                  format_value(pair.m1 / codata::atomic_mass_unit));
  md.emplace_back("mass2_amu",
                  format_value(pair.m2 / codata::atomic_mass_unit));
  md.emplace_back("omega1_rad_per_s", format_value(trap.omega1));
  md.emplace_back("d_m", format_value(trap.d));
  md.emplace_back("T_over_T0", format_value(trap.T / base_period(trap)));
  md.emplace_back("lambda", format_value(trap.lambda));
  md.emplace_back("protocol", o.protocol);
  return md;
}

void write_result(const ExperimentResult& r, const Options& o,
                  std::ostream& out) {
  if (o.format != "csv" && o.format != "json")
    throw config_error("--format must be csv or json, got '" + o.format + "'");
  const std::string body = o.format == "json" ? to_json(r) : to_csv(r);
  if (o.out_path.empty()) {
    out << body;
  } else {
    std::ofstream f(o.out_path);
    if (!f)
      throw config_error("cannot open --out path '" + o.out_path + "'");
    f << body;
  }
}

nlohmann::ordered_json base_dump(const std::string& cmd, const Options& o,
                                 const IonPair& pair) {
  nlohmann::ordered_json j;
  j["subcommand"] = cmd;
  j["preset"] = o.preset_name;
  j["ions"] = pair.name1 + "," + pair.name2;
  j["mass1"] = pair.m1 / codata::atomic_mass_unit;
  j["mass2"] = pair.m2 / codata::atomic_mass_unit;
  j["omega1"] = o.omega1;
  j["d"] = o.d;
  j["lambda"] = o.lambda;
  j["threads"] = o.threads;
  j["format"] = o.format;
  if (!o.out_path.empty()) j["out"] = o.out_path;
  return j;
}

void write_dump(const Options& o, const nlohmann::ordered_json& j) {
  if (o.dump_path.empty()) return;
  std::ofstream f(o.dump_path);
  if (!f)
    throw config_error("cannot open --dump-config path '" + o.dump_path + "'");
  f << j.dump(2) << "\n";
}

// design: analytic trajectory table for one protocol at one T.
ExperimentResult run_design(const Options& o) {
  const ProtocolKind kind = protocol_kind_from_string(o.protocol);
  const IonPair pair = resolve_pair(o);
  const TrapSpec trap = resolve_trap(o, pair, o.T);
  const ModeData modes = normal_modes(pair, trap);
  const Protocol proto = build_protocol(kind, trap, modes, pair);

  const int n = o.samples != 0 ? o.samples : 1001;
  if (n < 2) throw config_error("--samples must be >= 2");

  nlohmann::ordered_json j = base_dump("design", o, pair);
  j["T"] = o.T;
  j["protocol"] = o.protocol;
  j["samples"] = n;
  write_dump(o, j);

  ExperimentResult r;
  r.columns = {"t", "Q0", "Q0dot", "Q0ddot"};
  r.metadata = cli_metadata("design", o, pair, trap);
  if (kind == ProtocolKind::poly14)
    r.metadata.emplace_back("condition_number",
                            format_value(proto.condition_number));
  for (int i = 0; i < n; ++i) {
    const double t =
        (i == n - 1) ? trap.T : trap.T * static_cast<double>(i) / (n - 1);
    const TrajectoryPoint pt = evaluate(proto, t);
    r.rows.push_back({format_value(t), format_value(pt.Q0),
                      format_value(pt.Q0dot), format_value(pt.Q0ddot)});
  }
  return r;
}

std::vector<std::string> excitation_row(const ExcitationReport& rep) {
  return {format_value(rep.lambda),
          format_value(rep.E_plus),
          format_value(rep.E_minus),
          format_value(rep.E_total),
          format_value(rep.E_total_hbarOmega_minus),
          to_string(rep.method)};
}

ExperimentResult run_excite(const Options& o) {
  const ProtocolKind kind = protocol_kind_from_string(o.protocol);
  const IonPair pair = resolve_pair(o);
  const TrapSpec trap = resolve_trap(o, pair, o.T);
  const ModeData modes = normal_modes(pair, trap);
  const Protocol proto = build_protocol(kind, trap, modes, pair);
  const Method m = resolve_method(o, kind);

  nlohmann::ordered_json j = base_dump("excite", o, pair);
  j["T"] = o.T;
  j["protocol"] = o.protocol;
  j["method"] = to_string(m);
  write_dump(o, j);

  ExperimentResult r;
  r.columns = {"lambda",    "E_plus_J",
               "E_minus_J", "E_total_J",
               "E_total_hbarOmega_minus", "method"};
  r.metadata = cli_metadata("excite", o, pair, trap);
  r.metadata.emplace_back("method", to_string(m));
  r.rows.push_back(excitation_row(run_excitation(proto, modes, o.lambda, m)));
  return r;
}

ExperimentResult run_sweep_lambda(const Options& o) {
  const ProtocolKind kind = protocol_kind_from_string(o.protocol);
  const IonPair pair = resolve_pair(o);
  const TrapSpec trap = resolve_trap(o, pair, o.T);
  const ModeData modes = normal_modes(pair, trap);
  const Protocol proto = build_protocol(kind, trap, modes, pair);
  const Method m = resolve_method(o, kind);
  if (o.lambda_steps < 1)
    throw config_error("--lambda-steps must be >= 1");

  nlohmann::ordered_json j = base_dump("sweep-lambda", o, pair);
  j["T"] = o.T;
  j["protocol"] = o.protocol;
  j["method"] = to_string(m);
  j["lambda-min"] = o.lambda_min;
  j["lambda-max"] = o.lambda_max;
  j["lambda-steps"] = o.lambda_steps;
  write_dump(o, j);

  ExperimentResult r;
  r.columns = {"lambda",    "E_plus_J",
               "E_minus_J", "E_total_J",
               "E_total_hbarOmega_minus", "method"};
  r.metadata = cli_metadata("sweep-lambda", o, pair, trap);
  r.metadata.emplace_back("method", to_string(m));
  r.metadata.emplace_back("lambda_min", format_value(o.lambda_min));
  r.metadata.emplace_back("lambda_max", format_value(o.lambda_max));
  r.metadata.emplace_back("lambda_steps", std::to_string(o.lambda_steps));
  for (double lam : uniform_grid(o.lambda_min, o.lambda_max, o.lambda_steps)) {
    try {
      r.rows.push_back(excitation_row(run_excitation(proto, modes, lam, m)));
    } catch (const config_error& e) {
      throw config_error("at lambda=" + format_value(lam) + ": " + e.what());
    } catch (const error& e) {
      throw numerics_error("at lambda=" + format_value(lam) + ": " + e.what(),
                           0.0);
    }
  }
  return r;
}

ExperimentResult run_sweep_time(const Options& o) {
  const ProtocolKind kind = protocol_kind_from_string(o.protocol);
  const IonPair pair = resolve_pair(o);
  const Method m = resolve_method(o, kind);
  if (o.T_steps < 1) throw config_error("--T-steps must be >= 1");

  nlohmann::ordered_json j = base_dump("sweep-time", o, pair);
  j["protocol"] = o.protocol;
  j["method"] = to_string(m);
  j["T-min"] = o.T_min;
  j["T-max"] = o.T_max;
  j["T-steps"] = o.T_steps;
  write_dump(o, j);

  const TrapSpec trap_echo = resolve_trap(o, pair, o.T_min);
  ExperimentResult r;
  r.columns = {"T_over_T0", "lambda",    "E_plus_J",
               "E_minus_J", "E_total_J", "E_total_hbarOmega_minus",
               "method"};
  r.metadata = cli_metadata("sweep-time", o, pair, trap_echo);
  r.metadata.emplace_back("method", to_string(m));
  r.metadata.emplace_back("T_min", format_value(o.T_min));
  r.metadata.emplace_back("T_max", format_value(o.T_max));
  r.metadata.emplace_back("T_steps", std::to_string(o.T_steps));
  for (double ratio : uniform_grid(o.T_min, o.T_max, o.T_steps)) {
    try {
      const TrapSpec trap = resolve_trap(o, pair, ratio);
      const ModeData modes = normal_modes(pair, trap);
      const Protocol proto = build_protocol(kind, trap, modes, pair);
      const ExcitationReport rep = run_excitation(proto, modes, o.lambda, m);
      std::vector<std::string> row = excitation_row(rep);
      row.insert(row.begin(), format_value(ratio));
      r.rows.push_back(std::move(row));
    } catch (const config_error& e) {
      throw config_error("at T=" + format_value(ratio) + " T0: " + e.what());
    } catch (const error& e) {
      throw numerics_error("at T=" + format_value(ratio) + " T0: " + e.what(),
                           0.0);
    }
  }
  return r;
}

ExperimentResult run_classical(const Options& o) {
  const ProtocolKind kind = protocol_kind_from_string(o.protocol);
  const IonPair pair = resolve_pair(o);
  const bool scan = o.provided("T-steps") || o.provided("T-min") ||
                    o.provided("T-max");

  nlohmann::ordered_json j = base_dump("classical", o, pair);
  j["protocol"] = o.protocol;
  if (scan) {
    j["T-min"] = o.T_min;
    j["T-max"] = o.T_max;
    j["T-steps"] = o.T_steps;
  } else {
    j["T"] = o.T;
  }
  write_dump(o, j);

  ExperimentResult r;
  r.columns = {"T_over_T0", "protocol", "E_exc_J", "E_exc_hbarOmega1",
               "steps",     "drift"};
  if (scan) {
    if (o.T_steps < 1) throw config_error("--T-steps must be >= 1");
    const TrapSpec trap_base = resolve_trap(o, pair, o.T_min);
    r.metadata = cli_metadata("classical", o, pair, trap_base);
    r.metadata.emplace_back("T_min", format_value(o.T_min));
    r.metadata.emplace_back("T_max", format_value(o.T_max));
    r.metadata.emplace_back("T_steps", std::to_string(o.T_steps));
    std::vector<double> T_grid;
    for (double ratio : uniform_grid(o.T_min, o.T_max, o.T_steps))
      T_grid.push_back(ratio / o.omega1);
    const std::vector<BreakdownRow> rows = harmonic_breakdown_scan(
        {kind}, pair, trap_base, T_grid, resolve_threads(o));
    for (const BreakdownRow& row : rows) {
      r.rows.push_back({format_value(row.T_over_T0), to_string(row.protocol),
                        format_value(row.E_exc_J),
                        format_value(row.E_exc_hbarOmega1),
                        std::to_string(row.steps), format_value(row.drift)});
    }
  } else {
    const TrapSpec trap = resolve_trap(o, pair, o.T);
    const ModeData modes = normal_modes(pair, trap);
    const Protocol proto = build_protocol(kind, trap, modes, pair);
    r.metadata = cli_metadata("classical", o, pair, trap);
    const ClassicalRun run = simulate(proto, pair, trap);
    const double E_eq = equilibrium_energy(pair, trap, 0.0);
    const double drift_rel = run.energy_drift_estimate / std::abs(E_eq);
    r.rows.push_back({format_value(o.T), to_string(kind),
                      format_value(run.E_exc),
                      format_value(run.E_exc / (codata::hbar * trap.omega1)),
                      std::to_string(run.steps), format_value(drift_rel)});
  }
  return r;
}

ExperimentResult run_compare(const Options& o) {
  const ProtocolKind kind = protocol_kind_from_string(o.protocol);
  if (kind == ProtocolKind::naive_quintic)
    throw config_error(
        "compare needs the perturbative method, which does not apply to the "
        "naive protocol");
  const IonPair pair = resolve_pair(o);
  const TrapSpec trap = resolve_trap(o, pair, o.T);
  const ModeData modes = normal_modes(pair, trap);
  const Protocol proto = build_protocol(kind, trap, modes, pair);
  if (o.lambda_steps < 1)
    throw config_error("--lambda-steps must be >= 1");

  nlohmann::ordered_json j = base_dump("compare", o, pair);
  j["T"] = o.T;
  j["protocol"] = o.protocol;
  j["lambda-min"] = o.lambda_min;
  j["lambda-max"] = o.lambda_max;
  j["lambda-steps"] = o.lambda_steps;
  write_dump(o, j);

  ExperimentResult r;
  r.columns = {"lambda", "E_perturbative_J", "E_oracle_J", "abs_diff_J"};
  r.metadata = cli_metadata("compare", o, pair, trap);
  r.metadata.emplace_back("lambda_min", format_value(o.lambda_min));
  r.metadata.emplace_back("lambda_max", format_value(o.lambda_max));
  r.metadata.emplace_back("lambda_steps", std::to_string(o.lambda_steps));
  for (double lam : uniform_grid(o.lambda_min, o.lambda_max, o.lambda_steps)) {
    const double Ep = excitation_perturbative(proto, modes, lam).E_total;
    const double Eo = excitation_oracle(proto, modes, lam).E_total;
    r.rows.push_back({format_value(lam), format_value(Ep), format_value(Eo),
                      format_value(std::abs(Ep - Eo))});
  }
  return r;
}

ExperimentResult run_figure(const Options& o) {
  if (o.figure_name.empty())
    throw config_error(
        "figure needs a name: fig1|fig2|fig3|fig4|fig5|scaling_law");
  const Figure fig = figure_from_string(o.figure_name);
  const Preset ps = preset(o.preset_name);
  ExperimentSpec spec = default_spec(fig, ps);

  const IonPair pair = resolve_pair(o);
  const TrapSpec trap = resolve_trap(o, pair, o.T);
  spec.pair = pair;
  spec.trap = trap;
  const double T0 = 1.0 / o.omega1; // seconds

  if (fig == Figure::fig1)
    spec.T_list = o.provided("T")
                      ? std::vector<double>{trap.T}
                      : std::vector<double>{7.5 * T0, 10.5 * T0};
  if (o.provided("protocol"))
    spec.protocols = {protocol_kind_from_string(o.protocol)};
  if (o.method != "auto") spec.method = method_from_string(o.method);
  spec.threads = resolve_threads(o);
  spec.output_path = o.out_path;

  switch (fig) {
    case Figure::fig2:
    case Figure::fig5:
    case Figure::scaling_law:
      if (o.provided("lambda-min")) spec.axis_min = o.lambda_min;
      if (o.provided("lambda-max")) spec.axis_max = o.lambda_max;
      if (o.provided("lambda-steps")) spec.axis_steps = o.lambda_steps;
      break;
    case Figure::fig4:
      if (o.provided("T-min")) spec.axis_min = o.T_min;
      if (o.provided("T-max")) spec.axis_max = o.T_max;
      if (o.provided("T-steps")) spec.axis_steps = o.T_steps;
      break;
    case Figure::fig1:
    case Figure::fig3:
      if (o.samples != 0) {
        if (o.samples < 2) throw config_error("--samples must be >= 2");
        spec.axis_steps = o.samples;
      }
      break;
  }

  nlohmann::ordered_json j = base_dump("figure", o, pair);
  j["figure"] = to_string(fig);
  if (o.provided("T")) j["T"] = o.T;
  if (o.provided("protocol")) j["protocol"] = o.protocol;
  j["method"] = to_string(spec.method);
  switch (fig) {
    case Figure::fig2:
    case Figure::fig5:
    case Figure::scaling_law:
      j["lambda-min"] = spec.axis_min;
      j["lambda-max"] = spec.axis_max;
      j["lambda-steps"] = spec.axis_steps;
      break;
    case Figure::fig4:
      j["T-min"] = spec.axis_min;
      j["T-max"] = spec.axis_max;
      j["T-steps"] = spec.axis_steps;
      break;
    case Figure::fig1:
    case Figure::fig3:
      j["samples"] = spec.axis_steps;
      break;
  }
  write_dump(o, j);

  return run(spec);
}

int run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const char* name, bool ok, const std::string& detail) {
    out << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!ok && !detail.empty()) out << "  (" << detail << ")";
    out << "\n";
    if (!ok) ++failures;
  };

  const Preset ps = preset("paper2014");
  const IonPair pair = make_ion_pair(ps.ion1, ps.ion2);
  const double w1 = 2.0 * std::numbers::pi * ps.omega1_linear_Hz;
  const double T0 = 1.0 / ps.omega1_linear_Hz;
  const TrapSpec trap = make_trap_spec(pair, w1, ps.d, 10.5 * T0, 0.0);
  const ModeData modes = normal_modes(pair, trap);

  {
    std::mt19937 gen(12345);
    std::uniform_real_distribution<double> mu_dist(1.0, 100.0);
    double worst = 0.0;
    for (int i = 0; i < 50; ++i) {
      const double mu = mu_dist(gen);
      const IonPair p = make_ion_pair_masses("i1", "i2", 1.0, mu);
      const TrapSpec tr = make_trap_spec(p, w1, ps.d, 10.5 * T0, 0.0);
      const ModeData md = normal_modes(p, tr);
      const double w2 = w1 * w1;
      worst = std::max(
          {worst,
           std::abs(md.a_plus * md.a_plus + md.b_plus * md.b_plus - 1.0),
           std::abs(md.a_minus * md.a_minus + md.b_minus * md.b_minus - 1.0),
           std::abs(md.a_plus * md.a_minus + md.b_plus * md.b_minus),
           std::abs(md.a_plus * md.b_minus - md.a_minus * md.b_plus - 1.0),
           std::abs((md.Omega_plus * md.Omega_plus +
                     md.Omega_minus * md.Omega_minus) /
                        (2.0 * w2 * (1.0 + 1.0 / mu)) -
                    1.0),
           std::abs((md.Omega_plus * md.Omega_plus * md.Omega_minus *
                     md.Omega_minus) /
                        (3.0 * w2 * w2 / mu) -
                    1.0)});
    }
    check("normal-mode identities, 50 random mass ratios", worst < 1e-12,
          "worst deviation " + format_value(worst));
  }

  {
    const IonPair eq = make_ion_pair_masses("a", "b", 9.0121831, 9.0121831);
    const TrapSpec tr = make_trap_spec(eq, w1, ps.d, 10.5 * T0, 0.0);
    const ModeData md = normal_modes(eq, tr);
    const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
    const bool basics =
        std::abs(md.a_plus - inv_sqrt2) < 1e-12 &&
        std::abs(md.b_plus + inv_sqrt2) < 1e-12 &&
        std::abs(md.Omega_plus * md.Omega_plus / (3.0 * w1 * w1) - 1.0) <
            1e-12 &&
        std::abs(md.Omega_minus * md.Omega_minus / (w1 * w1) - 1.0) < 1e-12 &&
        std::abs(md.c_plus) < 1e-12 * std::abs(md.c_minus);
    const Protocol proto = design_cosine(tr, md);
    auto [fp, fm] = forcing(proto, md, 0.0);
    const ModeTrajectory ap = alpha(proto, fp);
    double amax = 0.0;
    for (double v : ap.value) amax = std::max(amax, std::abs(v));
    check("equal-mass limit: plus mode decouples", basics && amax == 0.0,
          "max |alpha_plus| " + format_value(amax));
  }

  {
    bool ok = true;
    std::string detail;
    for (ProtocolKind kind :
         {ProtocolKind::cosine, ProtocolKind::poly14,
          ProtocolKind::naive_quintic, ProtocolKind::cm_only}) {
      try {
        const Protocol proto = build_protocol(kind, trap, modes, pair);
        const TrajectoryPoint p0 = evaluate(proto, 0.0);
        const TrajectoryPoint pT = evaluate(proto, trap.T);
        const double tolq = 1e-8 * trap.d; // the design-time gate
        if (std::abs(p0.Q0) > tolq || std::abs(pT.Q0 - trap.d) > tolq ||
            std::abs(p0.Q0dot) > tolq / trap.T ||
            std::abs(pT.Q0dot) > tolq / trap.T) {
          ok = false;
          detail = std::string("endpoint violation for ") + to_string(kind);
        }
      } catch (const error& e) {
        ok = false;
        detail = std::string(to_string(kind)) + ": " + e.what();
      }
    }
    check("protocol endpoint conditions, all four designs", ok, detail);
  }

  const Protocol cosine = design_cosine(trap, modes);
  const Protocol poly = design_poly14(trap, modes);

  {
    const double E_cos = excitation_perturbative(cosine, modes, 0.0).E_total;
    const double E_poly = excitation_perturbative(poly, modes, 0.0).E_total;
    const double bound = 1e-9 * codata::hbar * modes.Omega_minus;
    const double E_orc = excitation_oracle(cosine, modes, 0.0).E_total;
    check("zero-error exactness",
          E_cos == 0.0 && E_poly == 0.0 && E_orc < bound,
          "perturbative " + format_value(E_cos) + " / " +
              format_value(E_poly) + ", oracle " + format_value(E_orc) + " J");
  }

  check("polynomial design solve is well conditioned",
        poly.condition_number > 0.0 && poly.condition_number < 1e12,
        "condition number " + format_value(poly.condition_number));

  {
    auto row = [&]() {
      const ExcitationReport rep =
          excitation_perturbative(design_cosine(trap, modes), modes, 0.03);
      std::string s;
      for (const std::string& c : excitation_row(rep)) s += c + ",";
      return s;
    };
    const std::string a = row(), b = row();
    check("repeated runs are identical", a == b, a + " vs " + b);
  }

  {
    const double Ea = equilibrium_energy(pair, trap, 0.0);
    const double Eb = equilibrium_energy(pair, trap, trap.d);
    check("equilibrium energy is translation invariant",
          std::abs(Ea - Eb) < 1e-12 * std::abs(Ea),
          format_value(Ea) + " vs " + format_value(Eb));
  }

  out << (failures ? "selftest: FAILED\n" : "selftest: all checks passed\n");
  return failures ? 1 : 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  Options o;
  CLI::App app{
      "Two-ion shuttling: trajectory design, excitation analysis, classical "
      "simulation, and experiment recipes"};
  app.name("iontransport");
  app.require_subcommand(1);

  CLI::App* design = app.add_subcommand(
      "design", "emit a trajectory table (t, Q0, Q0dot, Q0ddot)");
  CLI::App* excite = app.add_subcommand(
      "excite", "final excitation energy for one (protocol, T, lambda)");
  CLI::App* sweep_lambda = app.add_subcommand(
      "sweep-lambda", "excitation energy over a lambda grid");
  CLI::App* sweep_time = app.add_subcommand(
      "sweep-time", "excitation energy over a duration grid");
  CLI::App* classical = app.add_subcommand(
      "classical", "full anharmonic classical simulation");
  CLI::App* compare = app.add_subcommand(
      "compare", "perturbative vs oracle excitation over a lambda grid");
  CLI::App* figure = app.add_subcommand(
      "figure", "reproducible experiment recipes (fig1..fig5, scaling_law)");
  app.add_subcommand("selftest", "run the embedded invariant suite");

  for (CLI::App* sub :
       {design, excite, sweep_lambda, sweep_time, classical, compare, figure})
    add_common_options(sub, o);
  figure->add_option("figure", o.figure_name,
                     "fig1|fig2|fig3|fig4|fig5|scaling_law");

  try {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("iontransport");
    for (const std::string& s : args) argv.push_back(s.c_str());
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  o.sub = sub;
  const std::string cmd = sub->get_name();

  try {
    if (!o.config_path.empty()) apply_config_file(o, cmd);
    apply_preset(o);

    if (cmd == "selftest") return run_selftest(out);

    ExperimentResult r;
    if (cmd == "design")
      r = run_design(o);
    else if (cmd == "excite")
      r = run_excite(o);
    else if (cmd == "sweep-lambda")
      r = run_sweep_lambda(o);
    else if (cmd == "sweep-time")
      r = run_sweep_time(o);
    else if (cmd == "classical")
      r = run_classical(o);
    else if (cmd == "compare")
      r = run_compare(o);
    else if (cmd == "figure")
      r = run_figure(o);
    else
      throw config_error("unknown subcommand '" + cmd + "'");
    write_result(r, o, out);
    return 0;
  } catch (const config_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const domain_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "failure: " << e.what() << "\n";
    return 2;
  }
}

} // namespace iontransport
