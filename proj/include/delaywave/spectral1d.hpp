#pragma once

#include <complex>
#include <string>

#include "delaywave/core.hpp"
#include "delaywave/solver.hpp"

namespace delaywave {

// The parameter triple of the 1D system on (0,1) with interior damping
// 2a u_t + a^2 u and delayed boundary feedback u_x(1,t) = -k u_t(1,t-tau)
// is BoundaryDelayParams from solver.hpp.

/// Gain bound (1 - e^{-2a}) / (1 + e^{-2a}); the spectrum stays in a left
/// half-plane whenever 0 < k below this value. Algebraically equal to
/// tanh(a).
double gain_threshold(double a);

/// Characteristic function obtained by separation of variables: with
/// u = e^{wt} phi(x), phi(0) = 0 forces phi = sinh((w+a)x) and the
/// boundary condition yields
///   F(w) = (w+a) cosh(w+a) + k w e^{-w tau} sinh(w+a).
/// w = -a is a structural zero of F (the mode shape degenerates to zero
/// there); it is an eigenvalue only when the deflated function
/// F(w)/(w+a) vanishes too.
std::complex<double> char_fn(std::complex<double> omega, const BoundaryDelayParams& p);

/// F(omega) = value * exp(log_scale); log_scale >= 0. Root finding and
/// residuals use this form so large |Re(omega+a)| or large tau never
/// overflow.
struct ScaledValue {
  std::complex<double> value;
  double log_scale = 0.0;
};
ScaledValue char_fn_scaled(std::complex<double> omega, const BoundaryDelayParams& p);

struct SearchBox {
  double re_lo = -4.0;
  double re_hi = 0.5;
  double im_hi = 30.0;
  int nre = 400;
  int nim = 400;
};

/// Re in [-3a-1, 0.5], Im in [0, 20/tau + 10], 400x400 scan grid.
SearchBox default_search_box(const BoundaryDelayParams& p);

/// Grid scan of the deflated characteristic function, Newton polish,
/// dedup, conjugate extension, and an argument-principle winding count
/// over the conjugate-symmetric box as a completeness check. Throws
/// "incomplete root capture" on a winding mismatch.
SpectralResult rightmost_roots(const BoundaryDelayParams& p, const SearchBox& box,
                               int max_roots = 64);

std::string roots_csv(const SpectralResult& r);

struct CrossValidation {
  bool performed = false;  // false when the modal amplitude is zero
  double abscissa = 0.0;
  double spectral_rate = 0.0;  // 2 |abscissa|
  double fitted_rate = 0.0;    // energy decay rate from the time domain
  double rel_gap = 0.0;
  Termination run_status = Termination::completed;
};

/// Simulates the system with modal initial data of the rightmost root and
/// compares the fitted energy decay rate against the spectral prediction.
/// Requires abscissa < 0; a blow-up in the expectedly stable run is
/// reported as a cross-validation failure.
CrossValidation crossvalidate_decay(const BoundaryDelayParams& p, int nx, double t_end,
                                    double cfl = 0.9, double amplitude = 1.0);

}  // namespace delaywave
