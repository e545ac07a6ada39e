#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "iontransport/classical_sim.hpp"
#include "iontransport/cli.hpp"
#include "iontransport/core_model.hpp"
#include "iontransport/errors.hpp"
#include "iontransport/excitation.hpp"
#include "iontransport/experiments.hpp"
#include "iontransport/mode_dynamics.hpp"
#include "iontransport/protocols.hpp"

namespace py = pybind11;
using namespace iontransport;

PYBIND11_MODULE(iontransport, m) {
  m.doc() =
      "Two-ion shuttling in a moving harmonic well: robust trajectory "
      "design, excitation analysis, and classical verification";

  py::register_exception<error>(m, "Error");

  py::class_<IonPair>(m, "IonPair")
      .def_readonly("name1", &IonPair::name1)
      .def_readonly("name2", &IonPair::name2)
      .def_readonly("m1", &IonPair::m1)
      .def_readonly("m2", &IonPair::m2)
      .def_readonly("mu", &IonPair::mu)
      .def("__repr__", [](const IonPair& p) {
        return "IonPair(" + p.name1 + ", " + p.name2 + ", mu=" +
               format_value(p.mu) + ")";
      });

  py::class_<TrapSpec>(m, "TrapSpec")
      .def_readonly("omega1", &TrapSpec::omega1)
      .def_readonly("d", &TrapSpec::d)
      .def_readonly("T", &TrapSpec::T)
      .def_readonly("lambda_", &TrapSpec::lambda)
      .def_readonly("u0", &TrapSpec::u0);

  py::class_<ModeData>(m, "ModeData")
      .def_readonly("a_plus", &ModeData::a_plus)
      .def_readonly("a_minus", &ModeData::a_minus)
      .def_readonly("b_plus", &ModeData::b_plus)
      .def_readonly("b_minus", &ModeData::b_minus)
      .def_readonly("Omega_plus", &ModeData::Omega_plus)
      .def_readonly("Omega_minus", &ModeData::Omega_minus)
      .def_readonly("Omega_plus_p", &ModeData::Omega_plus_p)
      .def_readonly("Omega_minus_p", &ModeData::Omega_minus_p)
      .def_readonly("l", &ModeData::l)
      .def_readonly("l_p", &ModeData::l_p)
      .def_readonly("c_plus", &ModeData::c_plus)
      .def_readonly("c_minus", &ModeData::c_minus);

  m.def("make_ion_pair", &make_ion_pair, py::arg("name1"), py::arg("name2"));
  m.def("make_ion_pair_masses", &make_ion_pair_masses, py::arg("name1"),
        py::arg("name2"), py::arg("m1_amu"), py::arg("m2_amu"));
  m.def("make_trap_spec", &make_trap_spec, py::arg("pair"), py::arg("omega1"),
        py::arg("d"), py::arg("T"), py::arg("lambda_"));
  m.def("normal_modes", &normal_modes, py::arg("pair"), py::arg("trap"));
  m.def("equilibrium_positions", &equilibrium_positions, py::arg("trap"),
        py::arg("modes"), py::arg("Q0"));
  m.def("base_period", &base_period, py::arg("trap"));

  py::enum_<ProtocolKind>(m, "ProtocolKind")
      .value("cosine", ProtocolKind::cosine)
      .value("poly14", ProtocolKind::poly14)
      .value("naive", ProtocolKind::naive_quintic)
      .value("cm_only", ProtocolKind::cm_only);

  py::class_<TrajectoryPoint>(m, "TrajectoryPoint")
      .def_readonly("Q0", &TrajectoryPoint::Q0)
      .def_readonly("Q0dot", &TrajectoryPoint::Q0dot)
      .def_readonly("Q0ddot", &TrajectoryPoint::Q0ddot);

  py::class_<Protocol>(m, "Protocol")
      .def_readonly("kind", &Protocol::kind)
      .def_readonly("coefficients", &Protocol::coefficients)
      .def_readonly("condition_number", &Protocol::condition_number);

  m.def("evaluate", &evaluate, py::arg("protocol"), py::arg("t"));
  m.def("design_cosine", &design_cosine, py::arg("trap"), py::arg("modes"));
  m.def("design_poly14", &design_poly14, py::arg("trap"), py::arg("modes"));
  m.def("design_naive", &design_naive, py::arg("trap"));
  m.def("design_cm_only", &design_cm_only, py::arg("trap"), py::arg("pair"));
  m.def("cm_frequency", &cm_frequency, py::arg("trap"), py::arg("pair"));

  py::enum_<Mode>(m, "Mode")
      .value("plus", Mode::plus)
      .value("minus", Mode::minus);

  py::class_<ModeForcing>(m, "ModeForcing")
      .def_readonly("mode", &ModeForcing::mode)
      .def_readonly("c", &ModeForcing::c)
      .def_readonly("Omega", &ModeForcing::Omega)
      .def_readonly("Omega_p", &ModeForcing::Omega_p)
      .def_readonly("lambda_", &ModeForcing::lambda)
      .def("P0", &ModeForcing::P0, py::arg("t"))
      .def("q0", &ModeForcing::q0, py::arg("t"))
      .def("q0_p", &ModeForcing::q0_p, py::arg("t"))
      .def("B", &ModeForcing::B, py::arg("t"));

  py::class_<ModeTrajectory>(m, "ModeTrajectory")
      .def_readonly("mode", &ModeTrajectory::mode)
      .def_readonly("T", &ModeTrajectory::T)
      .def_readonly("grid_size", &ModeTrajectory::grid_size)
      .def_readonly("dt", &ModeTrajectory::dt)
      .def_readonly("Omega_used", &ModeTrajectory::Omega_used)
      .def_readonly("t", &ModeTrajectory::t)
      .def_readonly("value", &ModeTrajectory::value)
      .def_readonly("deriv", &ModeTrajectory::deriv)
      .def_readonly("quadrature_error_estimate",
                    &ModeTrajectory::quadrature_error_estimate);

  m.def("forcing", &forcing, py::arg("protocol"), py::arg("modes"),
        py::arg("lambda_"));
  m.def("alpha", &alpha, py::arg("protocol"), py::arg("forcing"));
  m.def("perturbed_trajectory", &perturbed_trajectory, py::arg("protocol"),
        py::arg("forcing"), py::arg("lambda_"));
  m.def("max_newton_residual", &max_newton_residual, py::arg("trajectory"),
        py::arg("forcing"), py::arg("perturbed"));

  py::enum_<Method>(m, "Method")
      .value("perturbative", Method::perturbative)
      .value("oracle", Method::displacement_oracle);

  py::class_<ExcitationReport>(m, "ExcitationReport")
      .def_readonly("E_plus", &ExcitationReport::E_plus)
      .def_readonly("E_minus", &ExcitationReport::E_minus)
      .def_readonly("E_total", &ExcitationReport::E_total)
      .def_readonly("E_total_hbarOmega_minus",
                    &ExcitationReport::E_total_hbarOmega_minus)
      .def_readonly("E_total_hbarOmega1",
                    &ExcitationReport::E_total_hbarOmega1)
      .def_readonly("method", &ExcitationReport::method)
      .def_readonly("lambda_", &ExcitationReport::lambda)
      .def_readonly("protocol_kind", &ExcitationReport::protocol_kind);

  m.def("excitation_perturbative", &excitation_perturbative,
        py::arg("protocol"), py::arg("modes"), py::arg("lambda_"));
  m.def("excitation_oracle", &excitation_oracle, py::arg("protocol"),
        py::arg("modes"), py::arg("lambda_"));
  m.def("residual_combination", &residual_combination, py::arg("protocol"),
        py::arg("modes"), py::arg("mode"));

  py::class_<ClassicalState>(m, "ClassicalState")
      .def_readonly("q1", &ClassicalState::q1)
      .def_readonly("q2", &ClassicalState::q2)
      .def_readonly("p1", &ClassicalState::p1)
      .def_readonly("p2", &ClassicalState::p2)
      .def_readonly("t", &ClassicalState::t);

  py::class_<ClassicalRun>(m, "ClassicalRun")
      .def_readonly("final_state", &ClassicalRun::final_state)
      .def_readonly("E_exc", &ClassicalRun::E_exc)
      .def_readonly("energy_drift_estimate",
                    &ClassicalRun::energy_drift_estimate)
      .def_readonly("steps", &ClassicalRun::steps);

  m.def("simulate", &simulate, py::arg("protocol"), py::arg("pair"),
        py::arg("trap"));
  m.def("equilibrium_energy", &equilibrium_energy, py::arg("pair"),
        py::arg("trap"), py::arg("Q0"));

  py::enum_<Figure>(m, "Figure")
      .value("fig1", Figure::fig1)
      .value("fig2", Figure::fig2)
      .value("fig3", Figure::fig3)
      .value("fig4", Figure::fig4)
      .value("fig5", Figure::fig5)
      .value("scaling_law", Figure::scaling_law);

  py::class_<Preset>(m, "Preset")
      .def_readonly("name", &Preset::name)
      .def_readonly("ion1", &Preset::ion1)
      .def_readonly("ion2", &Preset::ion2)
      .def_readonly("omega1_linear_Hz", &Preset::omega1_linear_Hz)
      .def_readonly("d", &Preset::d);

  m.def("preset", &preset, py::arg("name"));

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def_readwrite("figure", &ExperimentSpec::figure)
      .def_readwrite("pair", &ExperimentSpec::pair)
      .def_readwrite("trap", &ExperimentSpec::trap)
      .def_readwrite("protocols", &ExperimentSpec::protocols)
      .def_readwrite("T_list", &ExperimentSpec::T_list)
      .def_readwrite("axis_min", &ExperimentSpec::axis_min)
      .def_readwrite("axis_max", &ExperimentSpec::axis_max)
      .def_readwrite("axis_steps", &ExperimentSpec::axis_steps)
      .def_readwrite("method", &ExperimentSpec::method)
      .def_readwrite("threads", &ExperimentSpec::threads);

  m.def("default_spec", &default_spec, py::arg("figure"), py::arg("preset"));

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("columns", &ExperimentResult::columns)
      .def_readonly("rows", &ExperimentResult::rows)
      .def_readonly("metadata", &ExperimentResult::metadata);

  py::class_<ScalingFit>(m, "ScalingFit")
      .def_readonly("protocol", &ScalingFit::protocol)
      .def_readonly("slope", &ScalingFit::slope)
      .def_readonly("intercept", &ScalingFit::intercept)
      .def_readonly("points", &ScalingFit::points);

  m.def("run", &run, py::arg("spec"));
  m.def("scaling_law", &scaling_law, py::arg("spec"));
  m.def("to_csv", &to_csv, py::arg("result"));
  m.def("to_json", &to_json, py::arg("result"));
  m.def("format_value", &format_value, py::arg("x"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"),
      "Run the command-line front end in-process; returns (exit_code, "
      "stdout, stderr)");
}
