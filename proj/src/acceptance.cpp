#include "delaywave/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <complex>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "delaywave/diagnostics.hpp"
#include "delaywave/io.hpp"
#include "delaywave/quadrature.hpp"
#include "delaywave/region.hpp"
#include "delaywave/solver.hpp"
#include "delaywave/spectral1d.hpp"

namespace delaywave {

namespace {

constexpr double kPi = std::numbers::pi;

// deterministic uniform numbers in [0, 1), platform-independent
struct XorShift {
  unsigned long long s;
  explicit XorShift(unsigned long long seed) : s(seed) {}
  double next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return static_cast<double>(s >> 11) / 9007199254740992.0;
  }
};

InitialData eigenmode_init(const Grid1D& g) {
  InitialData init;
  init.u0.resize(g.nx);
  init.u1.assign(g.nx, 0.0);
  const double beta = g.all_dirichlet ? kPi / g.length : 0.5 * kPi / g.length;
  for (int i = 0; i < g.nx; ++i) init.u0[i] = std::sin(beta * g.x(i));
  init.u0[0] = 0.0;
  if (g.all_dirichlet) init.u0[g.nx - 1] = 0.0;
  return init;
}

using cplx = std::complex<double>;

// Characteristic function of the interior-delay system on (0,1) with
// u(0) = 0 and u_x(1) = -k u_t(1): separation of variables gives
// phi = sinh(s x), s^2 = w^2 + a w e^{-w tau}, and the boundary
// condition yields H(w) = cosh(s) + k w sinh(s)/s. H is even in s and
// therefore entire in w; its zeros are the characteristic roots.
cplx interior_char(cplx w, double a, double k, double tau) {
  const cplx s2 = w * w + a * w * std::exp(-w * tau);
  const cplx s = std::sqrt(s2);
  const cplx sc = std::abs(s) < 1e-6 ? 1.0 + s2 / 6.0 : std::sinh(s) / s;
  return std::cosh(s) + k * w * sc;
}

struct ModalRoot {
  cplx omega;
  cplx s;
};

// Rightmost root by coarse scan plus Newton with a numerical derivative.
ModalRoot interior_rightmost_root(double a, double k, double tau) {
  const double re_lo = -4.0, re_hi = 0.1, im_hi = 24.0;
  const int nre = 240, nim = 240;
  std::vector<cplx> seeds;
  std::vector<double> mag(static_cast<std::size_t>(nre) * nim);
  const auto at = [&](int i, int j) -> double& {
    return mag[static_cast<std::size_t>(j) * nre + i];
  };
  for (int j = 0; j < nim; ++j)
    for (int i = 0; i < nre; ++i) {
      const cplx w{re_lo + (re_hi - re_lo) * i / (nre - 1.0),
                   im_hi * j / (nim - 1.0)};
      at(i, j) = std::abs(interior_char(w, a, k, tau));
    }
  for (int j = 0; j < nim; ++j)
    for (int i = 0; i < nre; ++i) {
      bool minimal = true;
      for (int dj = -1; dj <= 1 && minimal; ++dj)
        for (int di = -1; di <= 1; ++di) {
          const int ii = i + di, jj = j + dj;
          if ((di == 0 && dj == 0) || ii < 0 || jj < 0 || ii >= nre || jj >= nim)
            continue;
          if (at(ii, jj) < at(i, j)) {
            minimal = false;
            break;
          }
        }
      if (minimal)
        seeds.push_back({re_lo + (re_hi - re_lo) * i / (nre - 1.0),
                         im_hi * j / (nim - 1.0)});
    }

  ModalRoot best;
  best.omega = {-1e300, 0.0};
  for (cplx w : seeds) {
    for (int it = 0; it < 60; ++it) {
      const double h = 1e-7 * (1.0 + std::abs(w));
      const cplx f = interior_char(w, a, k, tau);
      if (std::abs(f) < 1e-12) break;
      const cplx fp = (interior_char(w + h, a, k, tau) -
                       interior_char(w - h, a, k, tau)) /
                      (2.0 * h);
      if (std::abs(fp) == 0.0) break;
      const cplx step = f / fp;
      w -= step;
      if (std::abs(step) < 1e-13 * (1.0 + std::abs(w))) break;
    }
    if (std::abs(interior_char(w, a, k, tau)) > 1e-9) continue;
    if (w.real() > best.omega.real() && w.real() < 0.5 &&
        std::abs(w.imag()) < im_hi + 1.0) {
      best.omega = w;
    }
  }
  if (best.omega.real() < -1e299)
    throw std::runtime_error("no characteristic root found for the modal run");
  if (best.omega.imag() < 0.0) best.omega = std::conj(best.omega);
  best.s = std::sqrt(best.omega * best.omega +
                     a * best.omega * std::exp(-best.omega * tau));
  return best;
}

// Modal initial data: u = Re(e^{wt} sinh(s x)) solves the system exactly,
// so its energy decays at the clean rate 2 Re(w) and the tail fit is
// free of multi-mode beating.
InitialData modal_init(const Grid1D& g, const ModalRoot& root) {
  InitialData init;
  init.u0.resize(g.nx);
  init.u1.resize(g.nx);
  std::vector<cplx> phi(g.nx);
  for (int i = 0; i < g.nx; ++i) {
    phi[i] = std::sinh(root.s * g.x(i));
    init.u0[i] = phi[i].real();
    init.u1[i] = (root.omega * phi[i]).real();
  }
  init.u0[0] = 0.0;
  init.u1[0] = 0.0;
  const cplx w = root.omega;
  init.history = [w, phi](double t, std::span<double> out) {
    const cplx factor = w * std::exp(w * t);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = (factor * phi[i]).real();
  };
  return init;
}

// Fit window ending at the 1e-8 relative-energy floor: below it the
// series is dominated by the O(h^4) level of spurious grid-frequency
// reflections, not by the physical decay.
struct TailWindow {
  double t1 = 0.0, t2 = 0.0;
  bool usable = false;
};

TailWindow tail_window(const std::vector<EnergySample>& samples, double tau) {
  TailWindow w;
  if (samples.size() < 8) return w;
  const double e0 = samples.front().e_total;
  if (!(e0 > 0.0)) return w;
  w.t2 = samples.back().t;
  for (const auto& s : samples) {
    if (!(s.e_total > 1e-8 * e0)) {
      w.t2 = s.t;
      break;
    }
  }
  w.t1 = std::max(2.0 * tau, 0.25 * w.t2);
  w.usable = w.t2 > w.t1;
  return w;
}

struct DecayRun {
  RunResult res;
  DecayFit fit;
  double root_re = 0.0;
  double mean_descent_rate = 0.0;
  bool completed = false, fit_ok = false, bound_ok = false, descent_ok = false;
};

DecayRun decay_run(double a, int nx, const GeometryConstants& geom) {
  DecayRun out;
  const auto rc = closed_form_weights(1.0, geom);
  const auto root = interior_rightmost_root(a, 1.0, 1.0);
  out.root_re = root.omega.real();
  RunConfig cfg;
  cfg.params = {a, 1.0, 1.0, 2.0 * a, false};
  cfg.grid = Grid1D::uniform(nx, 1.0);
  cfg.t_end = 14.0;
  cfg.cfl = 0.9;
  cfg.sample_every = 1;
  cfg.weights = {rc.gamma1, rc.gamma2, rc.epsilon};
  out.res = run(cfg, modal_init(std::get<Grid1D>(cfg.grid), root));
  out.completed = out.res.status == Termination::completed;
  if (!out.completed) return out;

  const auto& samples = out.res.samples;
  const double e0 = samples.front().e_total;
  const auto w = tail_window(samples, cfg.params.tau);
  if (!w.usable) return out;
  out.fit = fit_decay_window(samples, w.t1, w.t2);
  out.fit_ok = out.fit.c2 > 0.0 && out.fit.r2 > 0.95;

  std::vector<EnergySample> sub;
  for (const auto& s : samples)
    if (s.t >= w.t1 && s.t <= w.t2) sub.push_back(s);
  if (!sub.empty() && sub.front().e_total > 0.0) {
    const double c1_adj = 1.2 * out.fit.c1 * e0 / sub.front().e_total;
    out.bound_ok = check_decay_bound(sub, c1_adj, out.fit.c2).ok;
  }

  // Lyapunov descent after the first delay window, per-step slack 10 dt^2,
  // checked down to the same spurious-reflection floor as the fit. The
  // measured descent rate c = -dLyap/(dt E) must also be positive on
  // average.
  const double dt = out.res.step_info.dt;
  out.descent_ok = true;
  double c_sum = 0.0;
  long c_count = 0;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    if (samples[i].t < cfg.params.tau) continue;
    if (!(samples[i].e_total >= 1e-8 * e0) ||
        !(samples[i + 1].e_total >= 1e-8 * e0))
      break;
    const double tol = 10.0 * dt * dt * std::max(samples[i].lyap, 0.0);
    if (samples[i + 1].lyap > samples[i].lyap + tol) {
      out.descent_ok = false;
      break;
    }
    c_sum += -(samples[i + 1].lyap - samples[i].lyap) /
             (dt * samples[i].e_total);
    ++c_count;
  }
  out.mean_descent_rate = c_count > 0 ? c_sum / c_count : 0.0;
  out.descent_ok = out.descent_ok && out.mean_descent_rate > 0.0;
  return out;
}

struct RatioRange {
  double rmin = 0.0, rmax = 0.0;
};

RatioRange equivalence_range(const std::vector<EnergySample>& samples) {
  RatioRange r;
  const double e0 = samples.front().e_total;
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (const auto& s : samples) {
    if (!(s.e_total >= 1e-8 * e0)) continue;
    rmin = std::min(rmin, s.lyap / s.e_total);
    rmax = std::max(rmax, s.lyap / s.e_total);
  }
  r.rmin = rmin;
  r.rmax = rmax;
  return r;
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

std::vector<CriterionResult> run_acceptance(std::ostream* progress) {
  std::vector<CriterionResult> results;
  const auto log = [&](const std::string& s) {
    if (progress) (*progress) << s << "\n";
  };
  const auto timed = [&](int id, const std::string& name, double budget,
                         auto&& body) {
    CriterionResult r;
    r.id = id;
    r.name = name;
    r.budget_seconds = budget;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      body(r);
    } catch (const std::exception& e) {
      r.pass = false;
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    log("criterion " + std::to_string(id) + " (" + name + "): " +
        (r.pass ? "PASS" : "FAIL") + " [" + std::to_string(r.seconds) + "s] " +
        r.detail);
    results.push_back(std::move(r));
  };

  const GeometryConstants unit_geom = geometry_constants(IntervalGeom{1.0, 0.0});

  // shared between criteria 5 and 6
  DecayRun run_half_201;

  timed(1, "conservation drift", 30.0, [&](CriterionResult& r) {
    RunConfig cfg;
    cfg.params = {0.0, 0.0, 0.0, 0.1, true};
    cfg.grid = Grid1D::uniform(1001, 1.0);
    cfg.t_end = 10.0;
    cfg.cfl = 0.5;
    cfg.sample_every = 10;
    const auto res = run(cfg, eigenmode_init(std::get<Grid1D>(cfg.grid)));
    const double e0 = res.samples.front().e_total;
    double drift = 0.0;
    for (const auto& s : res.samples)
      drift = std::max(drift, std::abs(s.e_total - e0) / e0);
    r.pass = res.status == Termination::completed && drift < 1e-4;
    r.detail = "drift=" + fmt(drift);
  });

  timed(2, "scheme order", 0.0, [&](CriterionResult& r) {
    const double beta = 0.5 * kPi;
    double errs[3];
    const int nxs[3] = {101, 201, 401};
    for (int m = 0; m < 3; ++m) {
      RunConfig cfg;
      cfg.params = {0.0, 0.0, 0.0, 0.1, true};
      cfg.grid = Grid1D::uniform(nxs[m], 1.0);
      cfg.t_end = 1.0;
      cfg.cfl = 0.5;
      cfg.sample_every = 1000000;
      const auto& g = std::get<Grid1D>(cfg.grid);
      const auto res = run(cfg, eigenmode_init(g));
      std::vector<double> diff(g.nx);
      for (int i = 0; i < g.nx; ++i)
        diff[i] = res.final_u[i] -
                  std::sin(beta * g.x(i)) * std::cos(beta * res.final_t);
      errs[m] = std::sqrt(detail::integrate_sq_1d(diff, g.dx));
    }
    const double p1 = std::log2(errs[0] / errs[1]);
    const double p2 = std::log2(errs[1] / errs[2]);
    r.pass = p1 >= 1.8 && p1 <= 2.2 && p2 >= 1.8 && p2 <= 2.2;
    r.detail = "orders=" + fmt(p1) + "," + fmt(p2);
  });

  timed(3, "energy identity refinement", 0.0, [&](CriterionResult& r) {
    // Modal data keeps the solution smooth across t = tau; with a history
    // only zeroth-order compatible, E'' jumps there and the centered
    // difference of E picks up a first-order error at that one sample.
    const auto root = interior_rightmost_root(0.05, 1.0, 1.0);
    double maxres[2];
    const int nxs[2] = {101, 201};
    for (int m = 0; m < 2; ++m) {
      RunConfig cfg;
      cfg.params = {0.05, 1.0, 1.0, 0.1, false};
      cfg.grid = Grid1D::uniform(nxs[m], 1.0);
      cfg.t_end = 3.0;
      cfg.cfl = 0.5;
      cfg.sample_every = 1;
      const auto res =
          run(cfg, modal_init(std::get<Grid1D>(cfg.grid), root));
      const auto residuals = energy_identity_residual(res.samples, cfg.params);
      double worst = 0.0;
      for (const auto& tr : residuals) worst = std::max(worst, std::abs(tr[1]));
      maxres[m] = worst;
    }
    const double ratio = maxres[0] / maxres[1];
    r.pass = ratio >= 3.0;
    r.detail = "max_residuals=" + fmt(maxres[0]) + "," + fmt(maxres[1]) +
               " ratio=" + fmt(ratio);
  });

  timed(4, "explicit threshold", 0.0, [&](CriterionResult& r) {
    const double c0p_exact = 4.0 / (kPi * kPi);
    const double tr_fe = trace_constant_fe(IntervalGeom{1.0, 0.0}, 801);
    const double pc_fe = poincare_constant_fe(IntervalGeom{1.0, 0.0}, 801);
    const bool constants_ok = std::abs(tr_fe - 1.0) < 1e-8 &&
                              std::abs(pc_fe - c0p_exact) < 1e-4 * c0p_exact;
    const double a0 = a0_threshold(1.0, unit_geom);
    const double expected = (1.0 / 3.0) / (3.0 + c0p_exact);
    r.pass = constants_ok && std::abs(a0 - expected) <= 1e-6 * expected;
    r.detail = "a0=" + fmt(a0) + " expected=" + fmt(expected) +
               " trace_fe=" + fmt(tr_fe) + " poincare_fe=" + fmt(pc_fe);
  });

  timed(5, "exponential decay", 120.0, [&](CriterionResult& r) {
    const double a0 = a0_threshold(1.0, unit_geom);
    const auto quarter = decay_run(0.25 * a0, 201, unit_geom);
    run_half_201 = decay_run(0.5 * a0, 201, unit_geom);
    const auto& half = run_half_201;
    r.pass = quarter.completed && quarter.fit_ok && quarter.bound_ok &&
             quarter.descent_ok && half.completed && half.fit_ok &&
             half.bound_ok && half.descent_ok;
    r.detail = "a0_quarter: root_re=" + fmt(quarter.root_re) + " c2=" + fmt(quarter.fit.c2) +
               " r2=" + fmt(quarter.fit.r2) +
               " bound=" + (quarter.bound_ok ? "ok" : "violated") +
               " descent=" + (quarter.descent_ok ? "ok" : "violated") +
               " mean_c=" + fmt(quarter.mean_descent_rate) +
               "; a0_half: c2=" + fmt(half.fit.c2) +
               " r2=" + fmt(half.fit.r2) +
               " bound=" + (half.bound_ok ? "ok" : "violated") +
               " descent=" + (half.descent_ok ? "ok" : "violated") +
               " mean_c=" + fmt(half.mean_descent_rate);
  });

  timed(6, "lyapunov equivalence", 0.0, [&](CriterionResult& r) {
    if (!run_half_201.completed) {
      r.pass = false;
      r.detail = "criterion-5 run unavailable";
      return;
    }
    const double a0 = a0_threshold(1.0, unit_geom);
    const auto fine = decay_run(0.5 * a0, 401, unit_geom);
    const auto rc = equivalence_range(run_half_201.res.samples);
    const auto rf = equivalence_range(fine.res.samples);
    const double shift_min = std::abs(rf.rmin - rc.rmin) / rc.rmin;
    const double shift_max = std::abs(rf.rmax - rc.rmax) / rc.rmax;
    r.pass = rc.rmin > 0.0 && rf.rmin > 0.0 && std::isfinite(rc.rmax) &&
             shift_min < 0.2 && shift_max < 0.2;
    r.detail = "ratio=[" + fmt(rc.rmin) + "," + fmt(rc.rmax) + "] refined=[" +
               fmt(rf.rmin) + "," + fmt(rf.rmax) + "] shifts=" +
               fmt(shift_min) + "," + fmt(shift_max);
  });

  timed(7, "region consistency", 0.0, [&](CriterionResult& r) {
    const auto rc = closed_form_weights(1.0, unit_geom);
    const auto poly =
        feasible_polygon(rc.gamma1, rc.gamma2, rc.epsilon, 1.0, 1.0, unit_geom);
    XorShift rng(0x9e3779b97f4a7c15ull);
    long mismatches = 0, tested = 0;
    for (int i = 0; i < 10000; ++i) {
      const double a = rng.next() * 2.0 * rc.gamma1;
      const double xi = rng.next() * 2.0 * rc.gamma1;
      const auto f =
          feasible(a, xi, rc.gamma1, rc.gamma2, rc.epsilon, 1.0, 1.0, unit_geom);
      const double band = std::min(
          {std::abs(f.velocity.margin), std::abs(f.delayed_velocity.margin),
           std::abs(f.gradient.margin)});
      if (band < 1e-9) continue;  // boundary band excluded
      ++tested;
      const bool direct =
          f.velocity.ok && f.delayed_velocity.ok && f.gradient.ok;
      if (direct != point_in_polygon(poly, a, xi, 1e-12)) ++mismatches;
    }

    long construction_fail = 0;
    double a0_lo = 0.0, a0_hi = 0.0, a0_mid = a0_threshold(1.0, unit_geom);
    bool monotone = true;
    double prev = -1.0;
    for (int m = 0; m < 20; ++m) {
      const double k = std::pow(10.0, -2.0 + 4.0 * m / 19.0);
      const auto w = closed_form_weights(k, unit_geom);
      const double a0k = a0_threshold(k, unit_geom);
      for (double frac : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double a = frac * a0k;
        // tolerance knob: the gain constraint is saturated exactly by the
        // closed-form gamma1, so its zero margin may round to -1 ulp
        const auto f = feasible(a, 2.0 * a, w.gamma1, w.gamma2, w.epsilon, 1.0,
                                k, unit_geom, 1e-12);
        if (!f.all_ok) ++construction_fail;
      }
      if (m > 0 && k <= 1.0 && a0k < prev) monotone = false;  // rising toward k ~ 1
      prev = a0k;
    }
    a0_lo = a0_threshold(1e-4, unit_geom);
    a0_hi = a0_threshold(1e4, unit_geom);
    const bool extremes_ok = a0_lo < 1e-3 && a0_hi < 1e-3 &&
                             a0_lo < a0_threshold(1e-2, unit_geom) &&
                             a0_hi < a0_threshold(1e2, unit_geom) &&
                             a0_mid > a0_lo && a0_mid > a0_hi;
    r.pass = mismatches == 0 && tested > 9000 && construction_fail == 0 &&
             extremes_ok && monotone;
    r.detail = "membership_mismatches=" + std::to_string(mismatches) +
               "/" + std::to_string(tested) +
               " construction_violations=" + std::to_string(construction_fail) +
               " a0(1e-4)=" + fmt(a0_lo) + " a0(1e4)=" + fmt(a0_hi);
  });

  timed(8, "spectral suite", 180.0, [&](CriterionResult& r) {
    double worst_thr = 0.0;
    for (int i = 0; i < 100; ++i) {
      const double a = 0.05 + 0.05 * i;
      worst_thr = std::max(worst_thr, std::abs(gain_threshold(a) - std::tanh(a)));
    }
    const bool thr_ok = worst_thr <= 1e-14;

    bool k0_ok = true;
    double worst_k0 = 0.0;
    for (double a : {0.5, 1.0, 2.0}) {
      const BoundaryDelayParams p{a, 0.0, 1.0};
      const auto res = rightmost_roots(p, default_search_box(p));
      const double gap = std::abs(res.abscissa + a);
      worst_k0 = std::max(worst_k0, gap);
      k0_ok = k0_ok && gap < 1e-6;
    }

    XorShift rng(0x2545f4914f6cdd1dull);
    bool all_stable = true;
    double worst_abscissa = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < 20; ++i) {
      const double a = 0.2 + 1.8 * rng.next();
      const double tau = 0.3 + 2.2 * rng.next();
      const BoundaryDelayParams p{a, 0.9 * gain_threshold(a), tau};
      const auto res = rightmost_roots(p, default_search_box(p));
      worst_abscissa = std::max(worst_abscissa, res.abscissa);
      all_stable = all_stable && res.abscissa < 0.0;
    }

    const auto cv = crossvalidate_decay({1.0, 0.5, 1.0}, 801, 40.0);
    const bool cv_ok = cv.performed && cv.rel_gap < 0.1;

    r.pass = thr_ok && k0_ok && all_stable && cv_ok;
    r.detail = "threshold_max_err=" + fmt(worst_thr) +
               " k0_max_gap=" + fmt(worst_k0) +
               " random_worst_abscissa=" + fmt(worst_abscissa) +
               " crossval_gap=" + fmt(cv.rel_gap);
  });

  return results;
}

std::string render_report(const std::vector<CriterionResult>& results) {
  std::string out = "delaywave acceptance report\n";
  bool all = true;
  for (const auto& r : results) {
    out += "criterion " + std::to_string(r.id) + " (" + r.name + "): " +
           (r.pass ? "PASS" : "FAIL") + " " + r.detail + "\n";
    all = all && r.pass;
  }
  out += std::string("result: ") + (all ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace delaywave
