#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace iontransport::detail {

// Compensated (Kahan-Neumaier) accumulator. The convolution integrals
// downstream subtract nearly equal prefix sums; plain sequential summation
// leaves O(n eps) residue that is visible at the 1e-8 level the residual
// tests need, compensation removes it.
struct KahanSum {
  double s = 0.0;
  double c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// Composite Simpson integral over a uniform grid of n samples (n - 1
// intervals, n odd for a pure Simpson rule; an even n falls back to a
// trailing half-panel cubic correction).
inline double simpson(const double* g, std::size_t n, double h) {
  if (n < 2) return 0.0;
  if (n == 2) return 0.5 * h * (g[0] + g[1]);
  KahanSum acc;
  std::size_t i = 2;
  for (; i < n; i += 2)
    acc.add(h / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i]));
  if ((n - 1) % 2 != 0) {
    // odd interval count: last interval by the three-point cubic rule
    acc.add(h / 12.0 * (-g[n - 3] + 8.0 * g[n - 2] + 5.0 * g[n - 1]));
  }
  return acc.value();
}

// Cumulative integral G[i] = int_0^{t_i} g dt on a uniform grid. Even points
// follow the composite Simpson chain; each odd point adds a three-point
// cubic half-panel on top of its even neighbour, so no error compounds
// through the odd entries. The running even chain is compensated.
inline void cumulative_simpson(const double* g, std::size_t n, double h,
                               double* G) {
  if (n == 0) return;
  G[0] = 0.0;
  if (n == 1) return;
  if (n == 2) {
    G[1] = 0.5 * h * (g[0] + g[1]);
    return;
  }
  G[1] = h / 12.0 * (5.0 * g[0] + 8.0 * g[1] - g[2]);
  KahanSum acc;
  for (std::size_t i = 2; i < n; i += 2) {
    acc.add(h / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i]));
    G[i] = acc.value();
    if (i + 1 < n)
      G[i + 1] =
          G[i] + h / 12.0 * (-g[i - 1] + 8.0 * g[i] + 5.0 * g[i + 1]);
  }
}

inline double simpson(const std::vector<double>& g, double h) {
  return simpson(g.data(), g.size(), h);
}

inline void cumulative_simpson(const std::vector<double>& g, double h,
                               std::vector<double>& G) {
  G.resize(g.size());
  cumulative_simpson(g.data(), g.size(), h, G.data());
}

} // namespace iontransport::detail
