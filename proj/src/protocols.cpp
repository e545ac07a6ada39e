#include "iontransport/protocols.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "iontransport/detail/quadrature.hpp"
#include "iontransport/errors.hpp"

namespace iontransport {

namespace {

constexpr double pi = std::numbers::pi;

bool is_trig(ProtocolKind kind) {
  return kind == ProtocolKind::cosine || kind == ProtocolKind::cm_only;
}

// Endpoint contract shared by every design: start and end at rest with zero
// acceleration, Q0(0) = 0, Q0(T) = d.
void validate_endpoints(const Protocol& p) {
  // 1e-8 matches the design residual contract in natural units. Tighter
  // gates trip on evaluation rounding: the short-T poly14 coefficients reach
  // a few 1e4, so the endpoint sums cannot cancel below ~eps * sum j^2 |c_j|.
  const double d = p.trap.d, T = p.trap.T;
  const double tol_q = 1e-8 * d;
  const double tol_v = 1e-8 * d / T;
  const double tol_a = 1e-8 * d / (T * T);
  const TrajectoryPoint at0 = evaluate(p, 0.0);
  const TrajectoryPoint atT = evaluate(p, T);
  // non-strict so the degenerate d = 0 well (all tolerances 0) passes
  const bool ok = std::abs(at0.Q0) <= tol_q && std::abs(atT.Q0 - d) <= tol_q &&
                  std::abs(at0.Q0dot) <= tol_v &&
                  std::abs(atT.Q0dot) <= tol_v &&
                  std::abs(at0.Q0ddot) <= tol_a &&
                  std::abs(atT.Q0ddot) <= tol_a;
  if (!ok)
    throw design_error("designed trajectory violates endpoint conditions",
                       0.0);
}

} // namespace

std::string to_string(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::cosine: return "cosine";
    case ProtocolKind::poly14: return "poly14";
    case ProtocolKind::naive_quintic: return "naive";
    case ProtocolKind::cm_only: return "cm-only";
  }
  return "?";
}

ProtocolKind protocol_kind_from_string(const std::string& name) {
  if (name == "cosine") return ProtocolKind::cosine;
  if (name == "poly14") return ProtocolKind::poly14;
  if (name == "naive" || name == "naive_quintic")
    return ProtocolKind::naive_quintic;
  if (name == "cm-only" || name == "cm_only") return ProtocolKind::cm_only;
  throw config_error("unknown protocol '" + name +
                     "' (choose cosine|poly14|naive|cm-only)");
}

TrajectoryPoint evaluate(const Protocol& p, double t) {
  const double T = p.trap.T;
  if (!(t >= 0.0) || !(t <= T))
    throw domain_error("trajectory evaluated outside [0, T]");
  const double d = p.trap.d;
  const double s = t / T;

  if (is_trig(p.kind)) {
    // Q0/d = beta0 + sum_{j>=1} beta_j cos((2j-1) pi s)
    double q = p.coefficients[0];
    double v = 0.0;
    double a = 0.0;
    for (std::size_t j = 1; j < p.coefficients.size(); ++j) {
      const double k = (2.0 * static_cast<double>(j) - 1.0) * pi;
      const double beta = p.coefficients[j];
      q += beta * std::cos(k * s);
      v -= beta * k * std::sin(k * s);
      a -= beta * k * k * std::cos(k * s);
    }
    return {d * q, d * v / T, d * a / (T * T)};
  }

  // polynomial in s, Horner for value and both derivatives
  double q = 0.0, v = 0.0, a = 0.0;
  for (std::size_t idx = p.coefficients.size(); idx-- > 0;) {
    a = a * s + 2.0 * v;
    v = v * s + q;
    q = q * s + p.coefficients[idx];
  }
  // Horner chain above produces q = P, v = P', a = P'' directly
  return {d * q, d * v / T, d * a / (T * T)};
}

Protocol design_cosine(const TrapSpec& trap, const ModeData& modes) {
  const double T = trap.T;
  const double Wp2 = modes.Omega_plus * modes.Omega_plus;
  const double Wm2 = modes.Omega_minus * modes.Omega_minus;
  const double T2 = T * T;
  const double pi2 = pi * pi;
  const double denom = 2048.0 * T2 * T2 * Wp2 * Wm2;

  // Closed forms in T for the two free amplitudes; the unperturbed mode
  // frequencies enter because the cancellation targets the lambda -> 0 limit.
  const double beta3 =
      -49.0 * (T2 * Wp2 - 25.0 * pi2) * (T2 * Wm2 - 25.0 * pi2) / denom;
  const double beta4 =
      5.0 * (T2 * Wp2 - 49.0 * pi2) * (T2 * Wm2 - 49.0 * pi2) / denom;
  // beta1, beta2 absorb the endpoint conditions sum beta_j = -1/2 and
  // sum beta_j (2j-1)^2 = 0 for any beta3, beta4.
  const double beta1 = -9.0 / 16.0 + 2.0 * beta3 + 5.0 * beta4;
  const double beta2 = (1.0 - 48.0 * beta3 - 96.0 * beta4) / 16.0;

  Protocol p{ProtocolKind::cosine, {0.5, beta1, beta2, beta3, beta4}, trap,
             modes, 0.0};
  validate_endpoints(p);
  return p;
}

Protocol design_naive(const TrapSpec& trap) {
  Protocol p{ProtocolKind::naive_quintic,
             {0.0, 0.0, 0.0, 10.0, -15.0, 6.0},
             trap,
             ModeData{},
             0.0};
  validate_endpoints(p);
  return p;
}

double cm_frequency(const TrapSpec& trap, const IonPair& pair) {
  return std::sqrt(2.0 * trap.u0 / (pair.m1 + pair.m2));
}

Protocol design_cm_only(const TrapSpec& trap, const IonPair& pair) {
  const double w_cm = cm_frequency(trap, pair);
  const double T = trap.T;

  // Three harmonics: two absorb the endpoint conditions, the third cancels
  // the first-order excitation integral of the single assumed mode,
  // sum_j beta_j w_j^2 / (w_cm^2 - w_j^2) = 0 with w_j = (2j-1) pi / T.
  double g[4];
  for (int j = 1; j <= 3; ++j) {
    const double wj = (2.0 * j - 1.0) * pi / T;
    const double dj = w_cm * w_cm - wj * wj;
    if (std::abs(dj) < 1e-9 * w_cm * w_cm)
      throw design_error("cm-only design degenerate: harmonic " +
                             std::to_string(j) + " resonant with w_cm",
                         0.0);
    g[j] = wj * wj / dj;
  }
  const double denom = 2.0 * g[1] - 3.0 * g[2] + g[3];
  if (std::abs(denom) < 1e-12 * (std::abs(g[1]) + std::abs(g[2]) + std::abs(g[3])))
    throw design_error("cm-only design singular at this T", 0.0);
  const double beta3 = (9.0 * g[1] - g[2]) / (16.0 * denom);
  const double beta1 = -9.0 / 16.0 + 2.0 * beta3;
  const double beta2 = (1.0 - 48.0 * beta3) / 16.0;

  Protocol p{ProtocolKind::cm_only,
             {0.5, beta1, beta2, beta3, 0.0},
             trap,
             ModeData{},
             0.0};
  validate_endpoints(p);
  return p;
}

Protocol design_poly14(const TrapSpec& trap, const ModeData& modes) {
  constexpr int ncoef = 14;
  // Fixed assembly grid: deterministic output and plenty of margin for the
  // 1e-8 residual contract (the integrands are smooth).
  constexpr std::size_t N = 1 << 16;
  constexpr std::size_t n = N + 1;
  const double h = 1.0 / static_cast<double>(N);

  Eigen::Matrix<double, ncoef, ncoef> M = Eigen::Matrix<double, ncoef, ncoef>::Zero();
  Eigen::Matrix<double, ncoef, 1> rhs = Eigen::Matrix<double, ncoef, 1>::Zero();

  // Endpoint rows on P(s) = sum beta_j s^j.
  for (int j = 0; j < ncoef; ++j) {
    const double dj = j;
    M(0, j) = (j == 0) ? 1.0 : 0.0;           // P(0) = 0
    M(1, j) = 1.0;                            // P(1) = 1
    M(2, j) = (j == 1) ? 1.0 : 0.0;           // P'(0) = 0
    M(3, j) = dj;                             // P'(1) = 0
    M(4, j) = (j == 2) ? 2.0 : 0.0;           // P''(0) = 0
    M(5, j) = dj * (dj - 1.0);                // P''(1) = 0
  }
  rhs(1) = 1.0;

  // Mode response rows. All quantities dimensionless: the response of mode
  // Omega to monomial s^j is alpha_j(s) = Theta int_0^s qbar_j sin(Theta (s-u)) du
  // with qbar_j = -j (j-1) s^(j-2) / Theta^2, Theta = Omega T. Rows demand
  // alpha(1) = 0, alpha'(1) = 0 and zero cos/sin-weighted integrals, per mode.
  std::vector<double> svals(n), costh(n), sinth(n);
  std::vector<double> qc(n), qs(n), C(n), S(n), alpha(n), wcos(n), wsin(n);
  for (std::size_t i = 0; i < n; ++i)
    svals[i] = (i == N) ? 1.0 : static_cast<double>(i) * h;

  const double Theta_both[2] = {modes.Omega_plus * trap.T,
                                modes.Omega_minus * trap.T};
  for (int mode = 0; mode < 2; ++mode) {
    const double Theta = Theta_both[mode];
    for (std::size_t i = 0; i < n; ++i) {
      costh[i] = std::cos(Theta * svals[i]);
      sinth[i] = std::sin(Theta * svals[i]);
    }
    const int r0 = 6 + 4 * mode;
    for (int j = 2; j < ncoef; ++j) {
      const double jj = static_cast<double>(j) * (j - 1.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double qbar =
            -jj * std::pow(svals[i], j - 2) / (Theta * Theta);
        qc[i] = qbar * costh[i];
        qs[i] = qbar * sinth[i];
      }
      detail::cumulative_simpson(qc, h, C);
      detail::cumulative_simpson(qs, h, S);
      for (std::size_t i = 0; i < n; ++i)
        alpha[i] = Theta * (sinth[i] * C[i] - costh[i] * S[i]);
      for (std::size_t i = 0; i < n; ++i) {
        wcos[i] = alpha[i] * costh[i];
        wsin[i] = alpha[i] * sinth[i];
      }
      M(r0 + 0, j) = alpha[N];
      M(r0 + 1, j) = Theta * Theta * (costh[N] * C[N] + sinth[N] * S[N]);
      M(r0 + 2, j) = detail::simpson(wcos, h);
      M(r0 + 3, j) = detail::simpson(wsin, h);
    }
  }

  // Row equilibration before the solve: raw row scales span ~9 orders of
  // magnitude, which inflates the condition number far beyond what the
  // solution actually suffers.
  Eigen::Matrix<double, ncoef, ncoef> Me = M;
  Eigen::Matrix<double, ncoef, 1> rhse = rhs;
  for (int i = 0; i < ncoef; ++i) {
    const double scale = Me.row(i).cwiseAbs().maxCoeff();
    if (!(scale > 0.0))
      throw design_error("degenerate design row " + std::to_string(i), 0.0);
    Me.row(i) /= scale;
    rhse(i) /= scale;
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, ncoef, ncoef>> svd(Me);
  const double cond =
      svd.singularValues()(0) / svd.singularValues()(ncoef - 1);
  if (!std::isfinite(cond))
    throw design_error("design system singular to working precision", cond);
  if (cond > 1e12)
    std::fprintf(stderr,
                 "warning: poly14 design system condition number %.3e "
                 "exceeds 1e12; coefficients may be inaccurate\n",
                 cond);

  Eigen::FullPivLU<Eigen::Matrix<double, ncoef, ncoef>> lu(Me);
  if (!lu.isInvertible())
    throw design_error("design system singular to working precision", cond);
  Eigen::Matrix<double, ncoef, 1> beta = lu.solve(rhse);

  // Defensive residual check against the unequilibrated system; the
  // acceptance gate for this is 1e-8 in these (natural) units.
  const double resid = (M * beta - rhs).cwiseAbs().maxCoeff();
  if (!(resid < 1e-8))
    throw design_error("design residual " + std::to_string(resid) +
                           " exceeds 1e-8",
                       cond);

  Protocol p{ProtocolKind::poly14,
             std::vector<double>(beta.data(), beta.data() + ncoef),
             trap,
             modes,
             cond};
  validate_endpoints(p);
  return p;
}

} // namespace iontransport
