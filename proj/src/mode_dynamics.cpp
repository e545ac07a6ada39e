#include "iontransport/mode_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "iontransport/detail/quadrature.hpp"
#include "iontransport/errors.hpp"

namespace iontransport {

namespace {

constexpr std::size_t kStartIntervals = 2048;
constexpr std::size_t kMaxIntervals = 1u << 20;
constexpr double kRelTol = 1e-9;

struct GridResult {
  std::vector<double> t, value, deriv;
  double vmax = 0.0, dmax = 0.0;
};

// Sample v(t) = W int_0^t g(u) sin(W (t-u)) du and its time derivative on a
// uniform grid via the angle-addition split
//   v  = W  [ sin(Wt) C(t) - cos(Wt) S(t) ]
//   v' = W^2 [ cos(Wt) C(t) + sin(Wt) S(t) ]
// with C, S the cumulative cos/sin-weighted integrals of g.
template <typename G>
GridResult sample_convolution(double T, double W, const G& g, std::size_t N) {
  const std::size_t n = N + 1;
  const double h = T / static_cast<double>(N);
  GridResult r;
  r.t.resize(n);
  r.value.resize(n);
  r.deriv.resize(n);
  std::vector<double> gc(n), gs(n), C(n), S(n), cw(n), sw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = (i == N) ? T : static_cast<double>(i) * h;
    r.t[i] = ti;
    const double c = std::cos(W * ti);
    const double s = std::sin(W * ti);
    cw[i] = c;
    sw[i] = s;
    const double gi = g(ti);
    gc[i] = gi * c;
    gs[i] = gi * s;
  }
  detail::cumulative_simpson(gc, h, C);
  detail::cumulative_simpson(gs, h, S);
  for (std::size_t i = 0; i < n; ++i) {
    r.value[i] = W * (sw[i] * C[i] - cw[i] * S[i]);
    r.deriv[i] = W * W * (cw[i] * C[i] + sw[i] * S[i]);
    r.vmax = std::max(r.vmax, std::abs(r.value[i]));
    r.dmax = std::max(r.dmax, std::abs(r.deriv[i]));
  }
  return r;
}

template <typename G>
ModeTrajectory solve_driven(Mode mode, double T, double W, const G& g) {
  GridResult prev = sample_convolution(T, W, g, kStartIntervals);
  std::size_t N = kStartIntervals;
  double est = 0.0;
  for (;;) {
    const std::size_t N2 = N * 2;
    GridResult cur = sample_convolution(T, W, g, N2);
    double dv = 0.0, dd = 0.0;
    for (std::size_t i = 0; i <= N; ++i) {
      dv = std::max(dv, std::abs(cur.value[2 * i] - prev.value[i]));
      dd = std::max(dd, std::abs(cur.deriv[2 * i] - prev.deriv[i]));
    }
    const double rel_v = (cur.vmax > 0.0) ? dv / cur.vmax : 0.0;
    const double rel_d = (cur.dmax > 0.0) ? dd / cur.dmax : 0.0;
    const double rel = std::max(rel_v, rel_d);
    est = dv;
    if (rel < kRelTol) {
      ModeTrajectory traj;
      traj.mode = mode;
      traj.T = T;
      traj.grid_size = N2;
      traj.dt = T / static_cast<double>(N2);
      traj.Omega_used = W;
      traj.t = std::move(cur.t);
      traj.value = std::move(cur.value);
      traj.deriv = std::move(cur.deriv);
      traj.quadrature_error_estimate = est;
      return traj;
    }
    if (N2 >= kMaxIntervals)
      throw numerics_error(
          "mode quadrature did not converge at 2^20 intervals", est);
    prev = std::move(cur);
    N = N2;
  }
}

} // namespace

std::string to_string(Mode mode) {
  return mode == Mode::plus ? "plus" : "minus";
}

double ModeForcing::P0(double t) const {
  return evaluate(protocol, t).Q0dot * c;
}

double ModeForcing::q0(double t) const {
  return -evaluate(protocol, t).Q0ddot * c / (Omega * Omega);
}

double ModeForcing::q0_p(double t) const { return q0(t) / (1.0 + lambda); }

double ModeForcing::B(double t) const {
  return q0(t) * lambda / (1.0 + lambda);
}

std::pair<ModeForcing, ModeForcing> forcing(const Protocol& p,
                                            const ModeData& modes,
                                            double lambda) {
  ModeForcing plus{Mode::plus,  modes.c_plus,  modes.Omega_plus,
                   modes.Omega_plus * std::sqrt(1.0 + lambda), lambda, p};
  ModeForcing minus{Mode::minus, modes.c_minus, modes.Omega_minus,
                    modes.Omega_minus * std::sqrt(1.0 + lambda), lambda, p};
  return {std::move(plus), std::move(minus)};
}

ModeTrajectory alpha(const Protocol& p, const ModeForcing& f) {
  (void)p;
  return solve_driven(f.mode, f.protocol.trap.T, f.Omega,
                      [&f](double t) { return f.q0(t); });
}

ModeTrajectory perturbed_trajectory(const Protocol& p, const ModeForcing& f,
                                    double lambda) {
  (void)p;
  if (!(lambda > -0.99))
    throw config_error("lambda must exceed -0.99");
  return solve_driven(f.mode, f.protocol.trap.T, f.Omega_p,
                      [&f](double t) { return f.q0_p(t); });
}

double max_newton_residual(const ModeTrajectory& traj, const ModeForcing& f,
                           bool perturbed) {
  const double W = traj.Omega_used;
  const double h2 = traj.dt * traj.dt;
  const std::size_t n = traj.value.size();
  double worst = 0.0;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double acc = (-traj.value[i - 2] + 16.0 * traj.value[i - 1] -
                        30.0 * traj.value[i] + 16.0 * traj.value[i + 1] -
                        traj.value[i + 2]) /
                       (12.0 * h2);
    const double g = perturbed ? f.q0_p(traj.t[i]) : f.q0(traj.t[i]);
    worst = std::max(worst, std::abs(acc + W * W * (traj.value[i] - g)));
  }
  return worst;
}

std::string mode_table_csv(const ModeTrajectory& alpha_plus,
                           const ModeTrajectory& alpha_minus,
                           const ModeTrajectory& F_plus,
                           const ModeTrajectory& F_minus) {
  const std::size_t N = std::min(
      std::min(alpha_plus.grid_size, alpha_minus.grid_size),
      std::min(F_plus.grid_size, F_minus.grid_size));
  const auto stride = [N](const ModeTrajectory& tr) {
    return tr.grid_size / N;
  };
  const std::size_t kap = stride(alpha_plus), kam = stride(alpha_minus);
  const std::size_t kfp = stride(F_plus), kfm = stride(F_minus);
  std::ostringstream out;
  out << "t,alpha_plus,alpha_minus,F_plus,F_minus\n";
  char buf[512];
  for (std::size_t i = 0; i <= N; ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  alpha_plus.t[i * kap], alpha_plus.value[i * kap],
                  alpha_minus.value[i * kam], F_plus.value[i * kfp],
                  F_minus.value[i * kfm]);
    out << buf;
  }
  return out.str();
}

} // namespace iontransport
