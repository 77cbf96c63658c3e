#include "delaywave/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "delaywave/quadrature.hpp"

namespace delaywave {

using detail::gradient_1d;
using detail::integrate_sq_1d;

namespace {

double trapz_weight_1d(int i, int n, double dx) {
  return (i == 0 || i == n - 1) ? 0.5 * dx : dx;
}

double integrate_sq_2d(std::span<const double> f, const Grid2D& g) {
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double wy = trapz_weight_1d(j, g.ny, g.dy);
    for (int i = 0; i < g.nx; ++i) {
      const double v = f[g.idx(i, j)];
      s += wy * trapz_weight_1d(i, g.nx, g.dx) * v * v;
    }
  }
  return s;
}

double dx_at(std::span<const double> u, const Grid2D& g, int i, int j) {
  const double inv2 = 1.0 / (2.0 * g.dx);
  if (i == 0)
    return (-3.0 * u[g.idx(0, j)] + 4.0 * u[g.idx(1, j)] - u[g.idx(2, j)]) * inv2;
  if (i == g.nx - 1)
    return (3.0 * u[g.idx(i, j)] - 4.0 * u[g.idx(i - 1, j)] + u[g.idx(i - 2, j)]) * inv2;
  return (u[g.idx(i + 1, j)] - u[g.idx(i - 1, j)]) * inv2;
}

double dy_at(std::span<const double> u, const Grid2D& g, int i, int j) {
  const double inv2 = 1.0 / (2.0 * g.dy);
  if (j == 0)
    return (-3.0 * u[g.idx(i, 0)] + 4.0 * u[g.idx(i, 1)] - u[g.idx(i, 2)]) * inv2;
  if (j == g.ny - 1)
    return (3.0 * u[g.idx(i, j)] - 4.0 * u[g.idx(i, j - 1)] + u[g.idx(i, j - 2)]) * inv2;
  return (u[g.idx(i, j + 1)] - u[g.idx(i, j - 1)]) * inv2;
}

// Time trapezoid over the history window with per-slot weights
// supplied by `slot_weight(lag)`; integrand is the space integral of
// the squared slot field.
template <typename SpaceSq, typename W>
double window_integral(const FieldView& f, SpaceSq&& space_sq, W&& slot_weight) {
  const int n_tau = f.history->n_tau();
  if (n_tau == 0) return 0.0;
  double acc = 0.0;
  for (int lag = 0; lag <= n_tau; ++lag) {
    const double tw = (lag == 0 || lag == n_tau) ? 0.5 : 1.0;
    acc += tw * slot_weight(lag) * space_sq(f.history->read_lag(lag));
  }
  return acc * f.dt;
}

}  // namespace

EnergyTerms energy(const FieldView& f, const PhysicalParams& p, const Grid1D& g) {
  std::vector<double> grad;
  gradient_1d(f.u, g.dx, grad);
  EnergyTerms out;
  out.e_standard = 0.5 * (integrate_sq_1d(grad, g.dx) + integrate_sq_1d(f.v, g.dx));
  out.e_delay = 0.5 * p.xi *
                window_integral(
                    f, [&](std::span<const double> w) { return integrate_sq_1d(w, g.dx); },
                    [](int) { return 1.0; });
  out.e_total = out.e_standard + out.e_delay;
  return out;
}

EnergyTerms energy(const FieldView& f, const PhysicalParams& p, const Grid2D& g) {
  double grad_sq = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double wy = trapz_weight_1d(j, g.ny, g.dy);
    for (int i = 0; i < g.nx; ++i) {
      const double gx = dx_at(f.u, g, i, j);
      const double gy = dy_at(f.u, g, i, j);
      grad_sq += wy * trapz_weight_1d(i, g.nx, g.dx) * (gx * gx + gy * gy);
    }
  }
  EnergyTerms out;
  out.e_standard = 0.5 * (grad_sq + integrate_sq_2d(f.v, g));
  out.e_delay = 0.5 * p.xi *
                window_integral(
                    f, [&](std::span<const double> w) { return integrate_sq_2d(w, g); },
                    [](int) { return 1.0; });
  out.e_total = out.e_standard + out.e_delay;
  return out;
}

double s_functional(const FieldView& f, const Grid1D& g) {
  return window_integral(
      f, [&](std::span<const double> w) { return integrate_sq_1d(w, g.dx); },
      [&](int lag) { return std::exp(-lag * f.dt); });
}

double s_functional(const FieldView& f, const Grid2D& g) {
  return window_integral(
      f, [&](std::span<const double> w) { return integrate_sq_2d(w, g); },
      [&](int lag) { return std::exp(-lag * f.dt); });
}

double multiplier_term(const FieldView& f, const Grid1D& g) {
  std::vector<double> grad;
  gradient_1d(f.u, g.dx, grad);
  double s = 0.0;
  for (int i = 0; i < g.nx; ++i) {
    const double m = g.x(i) - g.x0;
    s += trapz_weight_1d(i, g.nx, g.dx) * 2.0 * m * grad[i] * f.v[i];
  }
  return s;
}

double multiplier_term(const FieldView& f, const Grid2D& g) {
  double s = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double wy = trapz_weight_1d(j, g.ny, g.dy);
    for (int i = 0; i < g.nx; ++i) {
      const double mx = g.x(i) - g.x0[0];
      const double my = g.y(j) - g.x0[1];
      const auto k = g.idx(i, j);
      const double mdotgrad =
          mx * dx_at(f.u, g, i, j) + my * dy_at(f.u, g, i, j);
      s += wy * trapz_weight_1d(i, g.nx, g.dx) *
           (2.0 * mdotgrad + f.u[k]) * f.v[k];
    }
  }
  return s;
}

double lyapunov(const FieldView& f, const PhysicalParams& p, const Grid1D& g,
                const LyapunovWeights& w) {
  return energy(f, p, g).e_total + w.gamma1 * multiplier_term(f, g) +
         w.gamma2 * s_functional(f, g);
}

double lyapunov(const FieldView& f, const PhysicalParams& p, const Grid2D& g,
                const LyapunovWeights& w) {
  return energy(f, p, g).e_total + w.gamma1 * multiplier_term(f, g) +
         w.gamma2 * s_functional(f, g);
}

double boundary_dissipation(const FieldView& f, const PhysicalParams& p,
                            const Grid1D& g) {
  if (g.all_dirichlet) return 0.0;
  const double vb = f.v[g.nx - 1];
  return p.k * vb * vb;
}

double boundary_dissipation(const FieldView& f, const PhysicalParams& p,
                            const Grid2D& g) {
  double s = 0.0;
  const auto edge_sq = [&](auto&& node, int count, double h) {
    double acc = 0.0;
    for (int m = 0; m < count; ++m) {
      const double v = f.v[node(m)];
      acc += ((m == 0 || m == count - 1) ? 0.5 : 1.0) * v * v;
    }
    return acc * h;
  };
  if (g.left == EdgeKind::feedback)
    s += edge_sq([&](int j) { return g.idx(0, j); }, g.ny, g.dy);
  if (g.right == EdgeKind::feedback)
    s += edge_sq([&](int j) { return g.idx(g.nx - 1, j); }, g.ny, g.dy);
  if (g.bottom == EdgeKind::feedback)
    s += edge_sq([&](int i) { return g.idx(i, 0); }, g.nx, g.dx);
  if (g.top == EdgeKind::feedback)
    s += edge_sq([&](int i) { return g.idx(i, g.ny - 1); }, g.nx, g.dx);
  return p.k * s;
}

VelocityIntegrals velocity_integrals(const FieldView& f, const Grid1D& g) {
  VelocityIntegrals out;
  out.vsq_now = integrate_sq_1d(f.v, g.dx);
  const int n_tau = f.history->n_tau();
  auto vd = n_tau <= f.history->pushed() - 1 ? f.history->read_lag(n_tau) : f.v;
  out.vsq_delay = integrate_sq_1d(vd, g.dx);
  double c = 0.5 * (f.v[0] * vd[0] + f.v[g.nx - 1] * vd[g.nx - 1]);
  for (int i = 1; i < g.nx - 1; ++i) c += f.v[i] * vd[i];
  out.cross = c * g.dx;
  return out;
}

VelocityIntegrals velocity_integrals(const FieldView& f, const Grid2D& g) {
  VelocityIntegrals out;
  out.vsq_now = integrate_sq_2d(f.v, g);
  const int n_tau = f.history->n_tau();
  auto vd = n_tau <= f.history->pushed() - 1 ? f.history->read_lag(n_tau) : f.v;
  out.vsq_delay = integrate_sq_2d(vd, g);
  double c = 0.0;
  for (int j = 0; j < g.ny; ++j) {
    const double wy = trapz_weight_1d(j, g.ny, g.dy);
    for (int i = 0; i < g.nx; ++i) {
      const auto k = g.idx(i, j);
      c += wy * trapz_weight_1d(i, g.nx, g.dx) * f.v[k] * vd[k];
    }
  }
  out.cross = c;
  return out;
}

std::vector<std::array<double, 2>> energy_identity_residual(
    std::span<const EnergySample> series, const PhysicalParams& p) {
  if (series.size() < 3)
    throw std::invalid_argument(
        "energy_identity_residual: need at least 3 per-step samples");
  std::vector<std::array<double, 2>> out;
  out.reserve(series.size() - 2);
  for (std::size_t i = 1; i + 1 < series.size(); ++i) {
    const auto& s = series[i];
    const double dt2 = series[i + 1].t - series[i - 1].t;
    const double dEdt = (series[i + 1].e_total - series[i - 1].e_total) / dt2;
    const double rhs = -p.a * s.cross_delay - s.boundary_diss +
                       0.5 * p.xi * (s.vsq_now - s.vsq_delay);
    out.push_back({s.t, dEdt - rhs});
  }
  return out;
}

DecayFit fit_decay_window(std::span<const EnergySample> series, double t_start,
                          double t_stop) {
  if (series.empty()) throw std::invalid_argument("fit_decay: empty series");
  const double e0 = series.front().e_total;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  long n = 0;
  for (const auto& s : series) {
    if (s.t < t_start || s.t > t_stop) continue;
    if (!(s.e_total > 0.0))
      throw std::runtime_error(
          "fit_decay: energy reached zero/negative; fit undefined");
    const double y = std::log(s.e_total);
    sx += s.t;
    sy += y;
    sxx += s.t * s.t;
    sxy += s.t * y;
    syy += y * y;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_decay: fewer than 2 samples in window");
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::runtime_error("fit_decay: degenerate window");
  const double slope = (n * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / n;
  DecayFit fit;
  fit.c2 = -slope;
  fit.c1 = std::exp(intercept) / e0;
  const double sst = syy - sy * sy / n;
  double sse = 0.0;
  for (const auto& s : series) {
    if (s.t < t_start || s.t > t_stop) continue;
    const double r = std::log(s.e_total) - (intercept + slope * s.t);
    sse += r * r;
  }
  fit.r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  return fit;
}

DecayFit fit_decay(std::span<const EnergySample> series, double t_start) {
  return fit_decay_window(series, t_start,
                          std::numeric_limits<double>::infinity());
}

BoundCheck check_decay_bound(std::span<const EnergySample> series, double c1,
                             double c2, double tol) {
  BoundCheck out;
  if (series.empty()) return out;
  const double e0 = series.front().e_total;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& s : series) {
    const double envelope = c1 * std::exp(-c2 * s.t) * e0;
    const double viol = envelope > 0.0
                            ? s.e_total / envelope - 1.0
                            : (s.e_total > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    worst = std::max(worst, viol);
  }
  out.max_violation = worst;
  out.ok = worst <= tol;
  return out;
}

}  // namespace delaywave
