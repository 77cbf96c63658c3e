#include "delaywave/spectral1d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "delaywave/io.hpp"

namespace delaywave {

namespace {

using cplx = std::complex<double>;

// Deflated characteristic function G(w) = F(w)/(w+a) and its derivative,
// scaled by exp(-log_scale) so nothing overflows:
//   G(w) = cosh z + k w e^{-w tau} sinhc z,   z = w + a.
struct DeflatedEval {
  cplx g, gp;
  double log_scale = 0.0;
};

cplx sinhc_small(cplx z) {
  const cplx z2 = z * z;
  return 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
}

cplx sinhc_prime_small(cplx z) {
  const cplx z2 = z * z;
  return z / 3.0 + z * z2 / 30.0 + z * z2 * z2 / 840.0;
}

DeflatedEval eval_deflated(cplx w, const BoundaryDelayParams& p) {
  const cplx z = w + p.a;
  const double rez = z.real();
  const double edel = -p.tau * w.real();  // Re(-w tau)
  DeflatedEval out;
  out.log_scale =
      std::max({std::abs(rez), std::abs(rez) + edel, edel, 0.0});
  const double e0 = out.log_scale;

  if (std::abs(z) < 0.5) {
    const cplx sc = std::abs(z) < 1e-4 ? sinhc_small(z) : std::sinh(z) / z;
    const cplx scp =
        std::abs(z) < 1e-4 ? sinhc_prime_small(z) : (std::cosh(z) - sc) / z;
    const double es = std::exp(-e0);
    const cplx pre = p.k * std::exp(-w * p.tau - e0);
    out.g = es * std::cosh(z) + pre * w * sc;
    out.gp = es * std::sinh(z) + pre * ((1.0 - w * p.tau) * sc + w * scp);
    return out;
  }

  const cplx ep = std::exp(z - e0);
  const cplx em = std::exp(-z - e0);
  const cplx eq = std::exp(z - w * p.tau - e0);
  const cplx er = std::exp(-z - w * p.tau - e0);
  const cplx cosh_s = 0.5 * (ep + em);
  const cplx sinh_s = 0.5 * (ep - em);
  const cplx sinhdel_s = 0.5 * (eq - er);  // e^{-w tau} sinh z, scaled
  const cplx coshdel_s = 0.5 * (eq + er);
  const cplx sc_del = sinhdel_s / z;       // e^{-w tau} sinhc z, scaled
  out.g = cosh_s + p.k * w * sc_del;
  out.gp = sinh_s +
           p.k * ((1.0 - w * p.tau) * sc_del + w * (coshdel_s - sc_del) / z);
  return out;
}

struct ContourNearRoot : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Accumulated phase change of G along the segment [wa, wb], adaptive.
double phase_along(cplx wa, cplx wb, const BoundaryDelayParams& p, int depth,
                   cplx ga, cplx gb) {
  const auto small = [&](cplx g, cplx w) {
    return std::abs(g) <= 1e-12 * (1.0 + std::abs(w));
  };
  if (small(ga, wa) || small(gb, wb))
    throw ContourNearRoot("characteristic root on the winding contour");
  const double d = std::arg(gb / ga);
  if (std::abs(d) <= 0.5 * 3.14159265358979323846) return d;
  if (depth <= 0)
    throw ContourNearRoot("winding contour phase did not resolve");
  const cplx mid = 0.5 * (wa + wb);
  const cplx gm = eval_deflated(mid, p).g;
  return phase_along(wa, mid, p, depth - 1, ga, gm) +
         phase_along(mid, wb, p, depth - 1, gm, gb);
}

long winding_count_box(const BoundaryDelayParams& p, double re_lo, double re_hi,
                       double im_lo, double im_hi) {
  const cplx corners[4] = {{re_lo, im_lo}, {re_hi, im_lo},
                           {re_hi, im_hi}, {re_lo, im_hi}};
  double total = 0.0;
  for (int s = 0; s < 4; ++s) {
    const cplx a = corners[s];
    const cplx b = corners[(s + 1) % 4];
    const int coarse = 64;
    cplx prev_w = a;
    cplx prev_g = eval_deflated(a, p).g;
    for (int i = 1; i <= coarse; ++i) {
      const double t = static_cast<double>(i) / coarse;
      const cplx w = a + t * (b - a);
      const cplx g = eval_deflated(w, p).g;
      total += phase_along(prev_w, w, p, 42, prev_g, g);
      prev_w = w;
      prev_g = g;
    }
  }
  const double turns = total / (2.0 * 3.14159265358979323846);
  const double rounded = std::round(turns);
  if (std::abs(turns - rounded) > 1e-3)
    throw ContourNearRoot("winding integral did not settle to an integer");
  return static_cast<long>(rounded);
}

struct NewtonResult {
  cplx omega;
  double residual_scaled = 0.0;  // |F| in scaled form
  bool converged = false;
};

NewtonResult newton_polish(cplx w, const BoundaryDelayParams& p) {
  NewtonResult out;
  for (int it = 0; it < 80; ++it) {
    const auto ev = eval_deflated(w, p);
    const double gn = std::abs(ev.g);
    if (!std::isfinite(gn)) break;
    if (gn <= 1e-13 * (1.0 + std::abs(w))) {
      out.omega = w;
      out.residual_scaled = std::abs((w + p.a) * ev.g);
      out.converged = true;
      return out;
    }
    if (std::abs(ev.gp) == 0.0) break;
    const cplx step = ev.g / ev.gp;
    w -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(w))) {
      const auto fin = eval_deflated(w, p);
      if (std::abs(fin.g) <= 1e-10 * (1.0 + std::abs(w))) {
        out.omega = w;
        out.residual_scaled = std::abs((w + p.a) * fin.g);
        out.converged = true;
      }
      return out;
    }
  }
  return out;
}

}  // namespace

double gain_threshold(double a) {
  if (!(a > 0.0)) throw std::invalid_argument("gain_threshold: a must be positive");
  const double e = std::exp(-2.0 * a);
  return (1.0 - e) / (1.0 + e);
}

std::complex<double> char_fn(std::complex<double> omega, const BoundaryDelayParams& p) {
  const auto sv = char_fn_scaled(omega, p);
  return sv.value * std::exp(sv.log_scale);
}

ScaledValue char_fn_scaled(std::complex<double> omega, const BoundaryDelayParams& p) {
  const auto ev = eval_deflated(omega, p);
  return {(omega + p.a) * ev.g, ev.log_scale};
}

SearchBox default_search_box(const BoundaryDelayParams& p) {
  SearchBox b;
  b.re_lo = -3.0 * p.a - 1.0;
  b.re_hi = 0.5;
  b.im_hi = 20.0 / p.tau + 10.0;
  return b;
}

SpectralResult rightmost_roots(const BoundaryDelayParams& p, const SearchBox& box,
                               int max_roots) {
  if (!(p.a > 0.0) || !(p.k >= 0.0) || !(p.tau > 0.0))
    throw std::invalid_argument("rightmost_roots: need a > 0, k >= 0, tau > 0");
  if (box.nre < 8 || box.nim < 8 || !(box.re_hi > box.re_lo) || !(box.im_hi > 0))
    throw std::invalid_argument("rightmost_roots: malformed search box");

  // scan log|G| for local minima as Newton seeds
  const int nre = box.nre, nim = box.nim;
  std::vector<double> logmag(static_cast<std::size_t>(nre) * nim);
  const auto at = [&](int i, int j) -> double& {
    return logmag[static_cast<std::size_t>(j) * nre + i];
  };
  for (int j = 0; j < nim; ++j) {
    const double im = box.im_hi * j / (nim - 1.0);
    for (int i = 0; i < nre; ++i) {
      const double re = box.re_lo + (box.re_hi - box.re_lo) * i / (nre - 1.0);
      const auto ev = eval_deflated({re, im}, p);
      const double m = std::abs(ev.g);
      at(i, j) = (m > 0.0 ? std::log(m) : -1e300) + ev.log_scale;
    }
  }
  std::vector<cplx> seeds;
  for (int j = 0; j < nim; ++j) {
    for (int i = 0; i < nre; ++i) {
      const double v = at(i, j);
      bool minimal = true;
      for (int dj = -1; dj <= 1 && minimal; ++dj) {
        for (int di = -1; di <= 1; ++di) {
          if (di == 0 && dj == 0) continue;
          const int ii = i + di, jj = j + dj;
          if (ii < 0 || jj < 0 || ii >= nre || jj >= nim) continue;
          if (at(ii, jj) < v) {
            minimal = false;
            break;
          }
        }
      }
      if (minimal)
        seeds.push_back({box.re_lo + (box.re_hi - box.re_lo) * i / (nre - 1.0),
                         box.im_hi * j / (nim - 1.0)});
    }
  }

  std::vector<SpectralResult::Root> roots;
  const double margin = 1e-9;
  for (const auto& s : seeds) {
    const auto nr = newton_polish(s, p);
    if (!nr.converged) continue;
    cplx w = nr.omega;
    if (std::abs(w.imag()) < 1e-9) w = {w.real(), 0.0};
    if (w.imag() < -margin || w.imag() > box.im_hi + margin) continue;
    if (w.real() < box.re_lo - margin || w.real() > box.re_hi + margin) continue;
    if (w.imag() < 0.0) w = std::conj(w);
    bool dup = false;
    for (const auto& r : roots)
      if (std::abs(r.omega - w) <= 1e-7 * (1.0 + std::abs(w))) {
        dup = true;
        break;
      }
    if (!dup) roots.push_back({w, nr.residual_scaled});
  }

  // conjugate extension
  std::vector<SpectralResult::Root> all;
  for (const auto& r : roots) {
    all.push_back(r);
    if (r.omega.imag() > 0.0) all.push_back({std::conj(r.omega), r.residual});
  }
  std::sort(all.begin(), all.end(), [](const auto& x, const auto& y) {
    if (x.omega.real() != y.omega.real()) return x.omega.real() > y.omega.real();
    if (std::abs(x.omega.imag()) != std::abs(y.omega.imag()))
      return std::abs(x.omega.imag()) < std::abs(y.omega.imag());
    return x.omega.imag() > y.omega.imag();
  });

  SpectralResult res;
  res.box_re_lo = box.re_lo;
  res.box_re_hi = box.re_hi;
  res.box_im_hi = box.im_hi;

  // winding check over the conjugate-symmetric box; nudge the contour if
  // it happens to pass through a root
  long winding = -1;
  double re_lo = box.re_lo, re_hi = box.re_hi, im_hi = box.im_hi;
  for (int attempt = 0; attempt < 4; ++attempt) {
    try {
      winding = winding_count_box(p, re_lo, re_hi, -im_hi, im_hi);
      break;
    } catch (const ContourNearRoot&) {
      re_lo -= 0.0171 * (1.0 + std::abs(re_lo));
      re_hi += 0.0171 * (1.0 + std::abs(re_hi));
      im_hi *= 1.0131;
    }
  }
  if (winding < 0)
    throw std::runtime_error(
        "incomplete root capture: winding contour kept hitting roots");
  long found = 0;
  for (const auto& r : all)
    if (r.omega.real() > re_lo && r.omega.real() < re_hi &&
        std::abs(r.omega.imag()) < im_hi)
      ++found;
  res.winding_count = winding;
  res.found_count = found;
  res.winding_ok = winding == found;
  if (!res.winding_ok)
    throw std::runtime_error("incomplete root capture: winding count " +
                             std::to_string(winding) + " vs roots found " +
                             std::to_string(found));

  if (static_cast<int>(all.size()) > max_roots) all.resize(max_roots);
  res.roots = std::move(all);
  if (!res.roots.empty()) {
    res.abscissa = res.roots.front().omega.real();
    res.beta = res.abscissa < 0.0 ? -res.abscissa : 0.0;
  } else {
    res.abscissa = -std::numeric_limits<double>::infinity();
    res.beta = std::numeric_limits<double>::infinity();
  }
  return res;
}

std::string roots_csv(const SpectralResult& r) {
  std::string out = "re,im,residual\n";
  for (const auto& root : r.roots)
    out += format_double(root.omega.real()) + "," +
           format_double(root.omega.imag()) + "," +
           format_double(root.residual) + "\n";
  return out;
}

CrossValidation crossvalidate_decay(const BoundaryDelayParams& p, int nx, double t_end,
                                    double cfl, double amplitude) {
  CrossValidation cv;
  if (amplitude == 0.0) return cv;  // zero data: nothing to validate

  const auto spec = rightmost_roots(p, default_search_box(p));
  if (spec.roots.empty())
    throw std::runtime_error("cross-validation: no characteristic roots found");
  cv.abscissa = spec.abscissa;
  if (!(spec.abscissa < 0.0))
    throw std::runtime_error(
        "cross-validation requires a negative spectral abscissa");
  cv.spectral_rate = 2.0 * std::abs(spec.abscissa);

  cplx w0 = spec.roots.front().omega;
  if (w0.imag() < 0.0) w0 = std::conj(w0);
  const cplx z0 = w0 + p.a;

  Grid1D g = Grid1D::uniform(nx, 1.0);
  std::vector<double> u0(nx), u1(nx);
  for (int j = 0; j < nx; ++j) {
    const cplx phi = std::sinh(z0 * g.x(j));
    u0[j] = amplitude * phi.real();
    u1[j] = amplitude * (w0 * phi).real();
  }
  const cplx phi_end = std::sinh(z0);
  const auto vb = [=](double s) {
    return amplitude * (w0 * std::exp(w0 * s) * phi_end).real();
  };

  const auto series = run_boundary_delay_1d({p.a, p.k, p.tau}, g, u0, u1, vb,
                                            t_end, cfl, 5);
  cv.run_status = series.status;
  if (series.status != Termination::completed)
    throw std::runtime_error(
        "cross-validation failure: expected-stable run terminated early");

  // fit the tail above the floating-point floor
  const double e0 = series.e.front();
  double t_floor = series.t.back();
  for (std::size_t i = 0; i < series.e.size(); ++i) {
    if (!(series.e[i] > e0 * 1e-22)) {
      t_floor = series.t[i];
      break;
    }
  }
  const double t1 = 0.25 * t_floor, t2 = t_floor;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (std::size_t i = 0; i < series.e.size(); ++i) {
    if (series.t[i] < t1 || series.t[i] > t2) continue;
    if (!(series.e[i] > 0.0)) break;
    const double y = std::log(series.e[i]);
    sx += series.t[i];
    sy += y;
    sxx += series.t[i] * series.t[i];
    sxy += series.t[i] * y;
    ++n;
  }
  if (n < 8)
    throw std::runtime_error("cross-validation: decay tail too short to fit");
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  cv.fitted_rate = -slope;
  cv.rel_gap = std::abs(0.5 * cv.fitted_rate - std::abs(cv.abscissa)) /
               std::abs(cv.abscissa);
  cv.performed = true;
  return cv;
}

}  // namespace delaywave
