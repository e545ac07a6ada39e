#include "iontransport/classical_sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

#include "iontransport/constants.hpp"
#include "iontransport/errors.hpp"

namespace iontransport {

namespace {

using State = std::array<double, 4>; // q1, q2, p1, p2

struct Rhs {
  double m1, m2, k; // k = u0 (1 + lambda)
  const Protocol* protocol; // nullptr: frozen well at Q0_frozen
  double Q0_frozen = 0.0;
  double T_clamp = 0.0; // protocol domain end, stage times are clamped to it

  State operator()(double t, const State& y) const {
    double Q0;
    if (protocol) {
      Q0 = evaluate(*protocol, std::min(std::max(t, 0.0), T_clamp)).Q0;
    } else {
      Q0 = Q0_frozen;
    }
    const double r = y[0] - y[1];
    const double fc = codata::coulomb_constant / (r * r);
    return {y[2] / m1, y[3] / m2, -k * (y[0] - Q0) + fc,
            -k * (y[1] - Q0) - fc};
  }
};

// Dormand-Prince 5(4) with FSAL and the standard error controller.
struct Dopri5 {
  double rtol;
  State atol;
  std::uint64_t max_steps = 50'000'000;

  // Integrates rhs over [t0, t1]; returns accepted step count.
  std::uint64_t run(const Rhs& rhs, double t0, double t1, State& y,
                    double h_init) const {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695,
                            e4 = b4 - 393.0 / 640,
                            e5 = b5 + 92097.0 / 339200,
                            e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    const double span = t1 - t0;
    double t = t0;
    double h = std::min(h_init, span);
    State k1 = rhs(t, y);
    std::uint64_t accepted = 0;
    std::uint64_t attempts = 0;

    while (t < t1) {
      if (++attempts > max_steps)
        throw integration_error("step budget exhausted", t, y[0], y[1]);
      if (h < 1e-16 * span)
        throw integration_error("step size underflow", t, y[0], y[1]);
      if (t + h > t1) h = t1 - t;

      State k2, k3, k4, k5, k6, k7, y5;
      State w;
      for (int i = 0; i < 4; ++i) w[i] = y[i] + h * a21 * k1[i];
      k2 = rhs(t + c2 * h, w);
      for (int i = 0; i < 4; ++i)
        w[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
      k3 = rhs(t + c3 * h, w);
      for (int i = 0; i < 4; ++i)
        w[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
      k4 = rhs(t + c4 * h, w);
      for (int i = 0; i < 4; ++i)
        w[i] = y[i] +
               h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
      k5 = rhs(t + c5 * h, w);
      for (int i = 0; i < 4; ++i)
        w[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                           a64 * k4[i] + a65 * k5[i]);
      k6 = rhs(t + h, w);
      for (int i = 0; i < 4; ++i)
        y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                            b5 * k5[i] + b6 * k6[i]);
      k7 = rhs(t + h, y5);

      double err_sq = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                              e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
        const double sc =
            atol[i] + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
        err_sq += (e / sc) * (e / sc);
      }
      const double err = std::sqrt(err_sq / 4.0);

      if (err <= 1.0) {
        t += h;
        y = y5;
        k1 = k7; // FSAL
        ++accepted;
        if (!(y[0] > y[1]))
          throw integration_error("ion ordering violated (q1 <= q2)", t, y[0],
                                  y[1]);
      }
      const double factor =
          std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
      h *= factor;
    }
    return accepted;
  }
};

double total_energy(const State& y, double m1, double m2, double k,
                    double Q0) {
  const double r = y[0] - y[1];
  return 0.5 * y[2] * y[2] / m1 + 0.5 * y[3] * y[3] / m2 +
         0.5 * k * ((y[0] - Q0) * (y[0] - Q0) + (y[1] - Q0) * (y[1] - Q0)) +
         codata::coulomb_constant / r;
}

} // namespace

double equilibrium_energy(const IonPair& pair, const TrapSpec& trap,
                          double Q0) {
  (void)pair;
  (void)Q0; // rigid translation: the value does not depend on Q0
  const double k = trap.u0 * (1.0 + trap.lambda);
  const double l_p = 2.0 * std::cbrt(codata::coulomb_constant / (4.0 * k));
  return 0.25 * k * l_p * l_p + codata::coulomb_constant / l_p;
}

ClassicalRun simulate(const Protocol& p, const IonPair& pair,
                      const TrapSpec& trap) {
  const ModeData modes = normal_modes(pair, trap);
  const double k = trap.u0 * (1.0 + trap.lambda);
  const double T = trap.T;

  Rhs rhs{pair.m1, pair.m2, k, &p, 0.0, T};

  Dopri5 stepper;
  stepper.rtol = 1e-11;
  const double aq = 1e-11 * modes.l;
  const double ap = 1e-11 * pair.m1 * trap.omega1 * modes.l;
  stepper.atol = {aq, aq, ap, ap};

  const double Q0_start = evaluate(p, 0.0).Q0;
  State y = {Q0_start + 0.5 * modes.l_p, Q0_start - 0.5 * modes.l_p, 0.0, 0.0};

  // resolve the fast mode comfortably at the first step
  const double h0 = 0.02 * 2.0 * std::numbers::pi / modes.Omega_plus_p;
  const std::uint64_t steps = stepper.run(rhs, 0.0, T, y, h0);

  const double Q0_end = evaluate(p, T).Q0;
  const double E_end = total_energy(y, pair.m1, pair.m2, k, Q0_end);
  const double E_eq = equilibrium_energy(pair, trap, Q0_end);

  // frozen-well segment to estimate conservation quality
  Rhs frozen{pair.m1, pair.m2, k, nullptr, Q0_end, 0.0};
  State y_drift = y;
  const double T0 = base_period(trap);
  stepper.run(frozen, T, T + T0, y_drift, h0);
  const double E_after =
      total_energy(y_drift, pair.m1, pair.m2, k, Q0_end);

  ClassicalRun run;
  run.final_state = {y[0], y[1], y[2], y[3], T};
  run.E_exc = E_end - E_eq;
  run.energy_drift_estimate = std::abs(E_after - E_end);
  run.steps = steps;
  return run;
}

std::vector<BreakdownRow> harmonic_breakdown_scan(
    const std::vector<ProtocolKind>& kinds, const IonPair& pair,
    const TrapSpec& trap_base, const std::vector<double>& T_grid,
    unsigned threads) {
  for (std::size_t i = 1; i < T_grid.size(); ++i)
    if (!(T_grid[i] > T_grid[i - 1]))
      throw config_error("T grid must be strictly increasing");

  const double T0 = base_period(trap_base);
  std::vector<BreakdownRow> rows(T_grid.size() * kinds.size());

  auto eval_point = [&](std::size_t idx) {
    const std::size_t it = idx / kinds.size();
    const ProtocolKind kind = kinds[idx % kinds.size()];
    BreakdownRow row;
    row.T_over_T0 = T_grid[it] / T0;
    row.protocol = kind;
    row.ok = false;
    row.E_exc_J = std::numeric_limits<double>::quiet_NaN();
    row.E_exc_hbarOmega1 = row.E_exc_J;
    row.steps = 0;
    row.drift = std::numeric_limits<double>::quiet_NaN();
    try {
      const TrapSpec trap = make_trap_spec(pair, trap_base.omega1, trap_base.d,
                                           T_grid[it], trap_base.lambda);
      const ModeData modes = normal_modes(pair, trap);
      Protocol proto;
      switch (kind) {
        case ProtocolKind::cosine: proto = design_cosine(trap, modes); break;
        case ProtocolKind::poly14: proto = design_poly14(trap, modes); break;
        case ProtocolKind::naive_quintic: proto = design_naive(trap); break;
        case ProtocolKind::cm_only:
          proto = design_cm_only(trap, pair);
          break;
      }
      const ClassicalRun run = simulate(proto, pair, trap);
      const double E_scale =
          total_energy({run.final_state.q1, run.final_state.q2,
                        run.final_state.p1, run.final_state.p2},
                       pair.m1, pair.m2, trap.u0 * (1.0 + trap.lambda),
                       evaluate(proto, trap.T).Q0);
      row.E_exc_J = run.E_exc;
      row.E_exc_hbarOmega1 = run.E_exc / (codata::hbar * trap.omega1);
      row.steps = run.steps;
      row.drift = run.energy_drift_estimate / std::abs(E_scale);
      row.ok = true;
    } catch (const error&) {
      // recorded as a missing value; the scan continues
    }
    rows[idx] = row;
  };

  const std::size_t total = rows.size();
  if (threads <= 1) {
    for (std::size_t i = 0; i < total; ++i) eval_point(i);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= total) return;
        eval_point(i);
      }
    };
    std::vector<std::future<void>> pool;
    const unsigned n = std::min<unsigned>(threads, total);
    for (unsigned i = 0; i < n; ++i)
      pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
  }
  return rows;
}

} // namespace iontransport
