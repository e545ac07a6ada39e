#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "iontransport/core_model.hpp"
#include "iontransport/protocols.hpp"

namespace iontransport {

enum class Mode { plus, minus };

std::string to_string(Mode mode);

// Driving terms of one normal mode for a given trajectory. Everything is an
// analytic closure over the protocol; q0 is the moving "equilibrium point"
// of the mode oscillator, q0_p its value under the miscalibrated spring,
// B the difference that sources the first-order excitation.
struct ModeForcing {
  Mode mode;
  double c;       // coupling factor, kg^(1/2)
  double Omega;   // rad/s, unperturbed mode frequency
  double Omega_p; // rad/s, Omega sqrt(1+lambda)
  double lambda;
  Protocol protocol;

  double P0(double t) const;   // kg^(1/2) m/s, Qdot c
  double q0(double t) const;   // kg^(1/2) m, -Qddot c / Omega^2
  double q0_p(double t) const; // q0 / (1+lambda)
  double B(double t) const;    // q0 lambda / (1+lambda)
};

// Solution samples of the driven oscillator v'' + W^2 (v - g(t)) = 0 started
// at rest, on a uniform grid. Obtained from the sine-kernel convolution; the
// derivative comes from the companion cosine-kernel integral, never from
// differencing.
struct ModeTrajectory {
  Mode mode;
  double T;          // s, grid extent
  std::size_t grid_size; // number of intervals (samples = grid_size + 1)
  double dt;
  double Omega_used; // W of the oscillator that produced these samples
  std::vector<double> t;
  std::vector<double> value; // kg^(1/2) m
  std::vector<double> deriv; // kg^(1/2) m/s
  double quadrature_error_estimate; // kg^(1/2) m, from the last grid doubling
};

// Build the (plus, minus) forcings for a protocol.
std::pair<ModeForcing, ModeForcing> forcing(const Protocol& p,
                                            const ModeData& modes,
                                            double lambda);

// Unperturbed mode response alpha (uses Omega and q0; lambda ignored).
// Grid-doubling quadrature from 2048 intervals, cap 2^20, converged when
// successive grids agree to 1e-9 of the maximum amplitude.
ModeTrajectory alpha(const Protocol& p, const ModeForcing& f);

// Perturbed response F (uses Omega_p and q0_p). Same scheme.
ModeTrajectory perturbed_trajectory(const Protocol& p, const ModeForcing& f,
                                    double lambda);

// Max interior Newton-equation residual |v'' + W^2 (v - g)| using a 5-point
// stencil for v''; g is q0 or q0_p depending on which trajectory this is.
// Diagnostic for tests; units kg^(1/2) m / s^2.
double max_newton_residual(const ModeTrajectory& traj, const ModeForcing& f,
                           bool perturbed);

// CSV block (t, alpha_plus, alpha_minus, F_plus, F_minus) on the coarsest
// common grid of the four trajectories.
std::string mode_table_csv(const ModeTrajectory& alpha_plus,
                           const ModeTrajectory& alpha_minus,
                           const ModeTrajectory& F_plus,
                           const ModeTrajectory& F_minus);

} // namespace iontransport
