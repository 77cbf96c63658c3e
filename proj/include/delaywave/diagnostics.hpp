#pragma once

#include <array>
#include <span>
#include <vector>

#include "delaywave/core.hpp"

namespace delaywave {

/// View of one trajectory snapshot: displacement u, centered velocity v,
/// and the velocity history whose newest slot is v itself. dt is the
/// slot spacing, so slot at lag j holds the velocity at time t - j*dt
/// and lag n_tau reaches exactly t - tau.
struct FieldView {
  double t = 0.0;
  std::span<const double> u;
  std::span<const double> v;
  const HistoryBuffer* history = nullptr;
  double dt = 0.0;
};

struct EnergyTerms {
  double e_standard = 0.0;
  double e_delay = 0.0;
  double e_total = 0.0;
};

// Trapezoid quadratures; gradients are centered inside and one-sided
// second order at boundary nodes.
EnergyTerms energy(const FieldView& f, const PhysicalParams& p, const Grid1D& g);
EnergyTerms energy(const FieldView& f, const PhysicalParams& p, const Grid2D& g);

// Exponentially discounted velocity history integral over (t - tau, t).
double s_functional(const FieldView& f, const Grid1D& g);
double s_functional(const FieldView& f, const Grid2D& g);

// int (2 m.grad(u) + (n-1) u) u_t dx; the (n-1) term vanishes in 1D.
double multiplier_term(const FieldView& f, const Grid1D& g);
double multiplier_term(const FieldView& f, const Grid2D& g);

double lyapunov(const FieldView& f, const PhysicalParams& p, const Grid1D& g,
                const LyapunovWeights& w);
double lyapunov(const FieldView& f, const PhysicalParams& p, const Grid2D& g,
                const LyapunovWeights& w);

// k * integral of u_t^2 over the feedback boundary (a point value in 1D).
double boundary_dissipation(const FieldView& f, const PhysicalParams& p,
                            const Grid1D& g);
double boundary_dissipation(const FieldView& f, const PhysicalParams& p,
                            const Grid2D& g);

// Velocity integrals feeding the energy-rate identity residual.
struct VelocityIntegrals {
  double vsq_now = 0.0;    // int u_t(t)^2
  double vsq_delay = 0.0;  // int u_t(t-tau)^2
  double cross = 0.0;      // int u_t(t) u_t(t-tau)
};
VelocityIntegrals velocity_integrals(const FieldView& f, const Grid1D& g);
VelocityIntegrals velocity_integrals(const FieldView& f, const Grid2D& g);

/// Residual of the energy rate identity
///   dE/dt = -a int u_t(t) u_t(t-tau) - k int_{Gamma1} u_t^2
///           + (xi/2) int u_t^2(t) - (xi/2) int u_t^2(t-tau)
/// evaluated on a per-step sampled series with centered differences of
/// e_total. Returns (t, residual) for the interior sample points.
/// Requires at least 3 samples.
std::vector<std::array<double, 2>> energy_identity_residual(
    std::span<const EnergySample> series, const PhysicalParams& p);

struct DecayFit {
  double c1 = 0.0;  // exp(intercept) / E(0)
  double c2 = 0.0;  // -slope of log E
  double r2 = 0.0;
};

/// Least-squares line through (t, log E) for t >= t_start. E(0) is the
/// first sample of the series. Throws if any energy in the window is
/// not strictly positive.
DecayFit fit_decay(std::span<const EnergySample> series, double t_start);
DecayFit fit_decay_window(std::span<const EnergySample> series, double t_start,
                          double t_stop);

struct BoundCheck {
  bool ok = true;
  double max_violation = 0.0;  // worst relative excess over the envelope
};

/// Checks E(t) <= C1 exp(-C2 t) E(0) (1 + tol) pointwise over the series.
BoundCheck check_decay_bound(std::span<const EnergySample> series, double c1,
                             double c2, double tol = 0.0);

}  // namespace delaywave
