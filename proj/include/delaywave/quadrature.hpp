#pragma once

#include <span>
#include <vector>

namespace delaywave::detail {

inline double trapz_w(int i, int n, double h) {
  return (i == 0 || i == n - 1) ? 0.5 * h : h;
}

// Centered differences inside, one-sided second order at the ends.
inline void gradient_1d(std::span<const double> u, double dx,
                        std::vector<double>& g) {
  const int n = static_cast<int>(u.size());
  g.resize(n);
  const double inv2 = 1.0 / (2.0 * dx);
  g[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * inv2;
  for (int i = 1; i < n - 1; ++i) g[i] = (u[i + 1] - u[i - 1]) * inv2;
  g[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * inv2;
}

inline double integrate_1d(std::span<const double> f, double dx) {
  const int n = static_cast<int>(f.size());
  double s = 0.5 * (f[0] + f[n - 1]);
  for (int i = 1; i < n - 1; ++i) s += f[i];
  return s * dx;
}

inline double integrate_sq_1d(std::span<const double> f, double dx) {
  const int n = static_cast<int>(f.size());
  double s = 0.5 * (f[0] * f[0] + f[n - 1] * f[n - 1]);
  for (int i = 1; i < n - 1; ++i) s += f[i] * f[i];
  return s * dx;
}

}  // namespace delaywave::detail
