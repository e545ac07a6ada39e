#pragma once

#include <string>
#include <utility>
#include <vector>

#include "iontransport/classical_sim.hpp"
#include "iontransport/core_model.hpp"
#include "iontransport/excitation.hpp"
#include "iontransport/protocols.hpp"

namespace iontransport {

// Named, reproducible experiment recipes. Each regenerates one of the result
// figures as a data table; plotting is out of scope.
enum class Figure { fig1, fig2, fig3, fig4, fig5, scaling_law };

std::string to_string(Figure f);
Figure figure_from_string(const std::string& name);

struct Preset {
  std::string name;
  std::string ion1, ion2;
  double omega1_linear_Hz; // linear frequency; omega1 = 2 pi times this
  double d;                // m
};

// Canonical parameter set used by the acceptance tests:
// Be9/Mg24, omega1 = 2 pi x 2 MHz, d = 370 um.
Preset preset(const std::string& name);

struct ExperimentSpec {
  Figure figure;
  IonPair pair;
  TrapSpec trap; // T and lambda give the base point for sweeps
  std::vector<ProtocolKind> protocols;
  std::vector<double> T_list; // s; trajectory figures may span several T
  double axis_min = 0.0;      // lambda or T/T0 axis, figure dependent
  double axis_max = 0.0;
  int axis_steps = 0; // grid points on the axis (or t samples)
  Method method = Method::perturbative;
  unsigned threads = 1;
  std::string output_path; // informational echo only
};

// Spec prefilled with each figure's canonical grid and protocol set.
ExperimentSpec default_spec(Figure figure, const Preset& ps);

// Tabular result. Cells are pre-formatted (%.17g for reals) so that repeated
// runs are byte-identical and CSV/JSON encode the same tokens. metadata echoes
// every input needed to re-run the experiment bit-identically.
struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<std::string, std::string>> metadata;
};

ExperimentResult run(const ExperimentSpec& spec);

struct ScalingFit {
  ProtocolKind protocol;
  double slope;     // d log10 E_excess / d log10 lambda
  double intercept; // log10 E at lambda = 1
  int points;       // grid points entering the fit
};

// Least-squares exponent of the lambda-induced excitation excess
// |E(lambda) - E(0)| on a logarithmic lambda grid, oracle energies.
std::vector<ScalingFit> scaling_law(const ExperimentSpec& spec);

// Leading '#' metadata comment block, header line, then data rows.
std::string to_csv(const ExperimentResult& r);

// JSON document with the identical numeric tokens.
std::string to_json(const ExperimentResult& r);

// %.17g formatting used for every real cell in this library's output.
std::string format_value(double x);

// Uniform grid with exact endpoints; a symmetric range hits zero exactly.
std::vector<double> uniform_grid(double lo, double hi, int n);

} // namespace iontransport
